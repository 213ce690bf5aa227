//! Planted clique to planted submatrix detection.
//!
//! `A` is the lower-left `N2 × N2` quarter of the adjacency matrix:
//! `A(i, j) = edge(N2 + i, j)`. Each entry of `B` is an inverse-CDF draw from
//! `Q0` where `A` is 0 and from `Q1` where it is 1. The output `X` is the sum
//! of the `(N2/p̄)²` consecutive `p̄ × p̄` blocks of `B` divided by `N2/p̄`,
//! truncated to `t̄` bits.
//!
//! rand layout: `N2²` slices of `T̄` bits for `B0` in row-major order, then
//! `N2²` slices for `B1`. Only the slice matching `A(i, j)` is read.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{check, RegionCheck};
use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::fixed::{ceil_4log2, ceil_log2_sqrt_6log2, log2_scaled, sqrt_6log2_raw, truncate, DiscretePmf, FixedPoint};
use crate::graph::GraphOracle;
use crate::tape::{BitTape, WorkspaceMeter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmatParams {
    pub ell: u64,
    pub k_s: u64,
    pub p_bar: u64,
    pub k_bar: u64,
    /// `[λ̄]_t̄`.
    pub lambda_bar: FixedPoint,
    pub t_bar: u32,
    pub w_bar: u32,
    pub t_cap: u32,
    /// `⌈log₂ M̄⌉`.
    pub log_m: u32,
    /// `⌊M̄ · 2^w̄⌋`.
    pub m_bar_raw: u128,
    pub n2: u64,
    pub region: Vec<RegionCheck>,
}

impl SubmatParams {
    /// Derives every width exactly. `lambda` is truncated to `t̄` bits.
    pub fn derive(ell: u64, k_s: u64, p_bar: u64, k_bar: u64, lambda: &BigRational) -> Result<Self> {
        if ell == 0 || k_s == 0 || p_bar == 0 {
            return Err(Error::param("ell, k_s and p_bar must be positive"));
        }
        let l = ell * k_s;
        if !l.is_multiple_of(2) {
            return Err(Error::Divisibility(format!("ell*k_s = {l} is odd")));
        }
        let n2 = l / 2;
        if !n2.is_multiple_of(p_bar) {
            return Err(Error::Divisibility(format!("p_bar = {p_bar} does not divide N2 = {n2}")));
        }
        let t_bar = ceil_4log2(p_bar);
        let cl = ceil_log2(l);
        let w_bar = t_bar + 6 * cl;
        let log_m = ceil_log2_sqrt_6log2(l);
        let t_cap = log_m + w_bar + 3 * cl;
        if t_cap > 127 {
            return Err(Error::param(format!("T_bar = {t_cap} exceeds the 127-bit probability width")));
        }
        let m_bar_raw = sqrt_6log2_raw(l, w_bar);
        let lambda_bar = truncate(lambda, t_bar);
        // λ̄² · L² · 6 log₂ L ≤ p̄², with log₂ L at 64 fraction bits rounded down
        let lam_ok = {
            let num = lambda.numer().to_biguint();
            let den = lambda.denom().to_biguint();
            match (num, den) {
                (Some(num), Some(den)) => {
                    let lhs = num.pow(2) * BigUint::from(l).pow(2) * 6u32 * log2_scaled(l, 64);
                    let rhs = (den.pow(2) * BigUint::from(p_bar).pow(2)) << 64u32;
                    lhs <= rhs
                }
                _ => false,
            }
        };
        let region = vec![
            check("20*k_bar = k_s", 20 * k_bar == k_s),
            check("2*k_s <= p_bar", 2 * k_s <= p_bar),
            check("p_bar <= ell*k_s/2", p_bar <= n2),
            check("k_bar <= p_bar", k_bar <= p_bar),
            check("lambda_bar <= p_bar/((ell*k_s)*sqrt(6 log(ell*k_s)))", lam_ok),
        ];
        Ok(SubmatParams { ell, k_s, p_bar, k_bar, lambda_bar, t_bar, w_bar, t_cap, log_m, m_bar_raw, n2, region })
    }

    pub fn in_region(&self) -> bool {
        self.region.iter().all(|c| c.holds)
    }

    /// `2·N2²·T̄`.
    pub fn rand_len(&self) -> u64 {
        2 * self.n2 * self.n2 * u64::from(self.t_cap)
    }

    pub fn rand_formula(&self) -> String {
        format!("2*{}^2*{}", self.n2, self.t_cap)
    }

    pub fn m_bar(&self) -> FixedPoint {
        FixedPoint::new(self.m_bar_raw as i128, self.w_bar)
    }

    /// `1/(2M̄)` for display.
    pub fn mu_bar(&self) -> f64 {
        1.0 / (2.0 * self.m_bar().to_f64())
    }

    fn blocks(&self) -> u64 {
        self.n2 / self.p_bar
    }
}

/// The `p̄ × p̄` output matrix, entries computed on demand.
pub struct SubmatInstance<G> {
    params: SubmatParams,
    sub: G,
    rand: BitTape,
    q0: DiscretePmf,
    q1: DiscretePmf,
}

pub fn submat_reduce<G: GraphOracle>(
    sub: G,
    params: &SubmatParams,
    rand: BitTape,
    q0: DiscretePmf,
    q1: DiscretePmf,
) -> Result<SubmatInstance<G>> {
    if u64::from(sub.vertex_count()) != 2 * params.n2 {
        return Err(Error::param(format!(
            "sub-instance has {} vertices, expected ell*k_s = {}",
            sub.vertex_count(),
            2 * params.n2
        )));
    }
    for q in [&q0, &q1] {
        if q.value_bits() != params.w_bar || q.prob_bits() != params.t_cap {
            return Err(Error::MalformedPmf(format!(
                "pmf has {}-bit values and {}-bit probabilities, expected {} and {}",
                q.value_bits(),
                q.prob_bits(),
                params.w_bar,
                params.t_cap
            )));
        }
        q.check_window(params.m_bar_raw as i128)?;
    }
    let need = params.rand_len();
    if rand.len() < need {
        return Err(Error::InsufficientRandomness { needed: need, available: rand.len() });
    }
    Ok(SubmatInstance { params: params.clone(), sub, rand, q0, q1 })
}

impl<G: GraphOracle> SubmatInstance<G> {
    pub fn params(&self) -> &SubmatParams {
        &self.params
    }

    pub fn rand(&self) -> &BitTape {
        &self.rand
    }

    pub fn a(&self, i: u64, j: u64) -> Result<bool> {
        self.sub.edge((self.params.n2 + i) as u32, j as u32)
    }

    /// `B(i, j)` for `i, j ∈ [N2]`, at `w̄` bits.
    pub fn b(&self, i: u64, j: u64) -> Result<FixedPoint> {
        let n2 = self.params.n2;
        if i == 0 || j == 0 || i > n2 || j > n2 {
            return Err(Error::param(format!("B({i}, {j}) outside {n2}x{n2}")));
        }
        let tt = u64::from(self.params.t_cap);
        let slice = ((i - 1) * n2 + (j - 1)) * tt;
        let (q, off) = if self.a(i, j)? { (&self.q1, n2 * n2 * tt + slice) } else { (&self.q0, slice) };
        let u = self.rand.read_uint(off, self.params.t_cap)?;
        Ok(q.inverse_cdf(u))
    }

    /// `[X(i, j)]_t̄` for `i, j ∈ [p̄]`.
    pub fn entry(&self, i: u64, j: u64) -> Result<FixedPoint> {
        self.entry_metered(i, j, None)
    }

    pub fn entry_metered(&self, i: u64, j: u64, meter: Option<&WorkspaceMeter>) -> Result<FixedPoint> {
        let p = self.params.p_bar;
        if i == 0 || j == 0 || i > p || j > p {
            return Err(Error::param(format!("X({i}, {j}) outside {p}x{p}")));
        }
        let q = self.params.blocks();
        let w = self.params.w_bar;
        let _bi = meter.map(|m| m.counter("submat.block_row", q)).transpose()?;
        let _bj = meter.map(|m| m.counter("submat.block_col", q)).transpose()?;
        let _u = meter.map(|m| m.charge("submat.u", self.params.t_cap.into())).transpose()?;
        let _cum = meter.map(|m| m.charge("submat.cum", u64::from(self.params.t_cap) + 1)).transpose()?;
        let _idx =
            meter.map(|m| m.counter("submat.support_index", self.q0.len().max(self.q1.len()) as u64)).transpose()?;
        // |sum| ≤ q² · M̄ · 2^w̄
        let sum_bits = 2 * u64::from(ceil_log2(q)) + u64::from(w) + u64::from(self.params.log_m) + 2;
        let _sum = meter.map(|m| m.charge("submat.sum", sum_bits)).transpose()?;
        let mut sum: i128 = 0;
        for bi in 0..q {
            for bj in 0..q {
                sum += self.b(bi * p + i, bj * p + j)?.raw;
            }
        }
        // ⌊sum / (q · 2^w̄) · 2^t̄⌋ with t̄ ≤ w̄
        let t = self.params.t_bar;
        let den = i128::from(q) << (w - t);
        Ok(FixedPoint::new(sum.div_euclid(den), t))
    }

    /// All entries, row-major.
    pub fn matrix(&self) -> Result<Vec<FixedPoint>> {
        let p = self.params.p_bar;
        let mut out = Vec::with_capacity((p * p) as usize);
        for i in 1..=p {
            for j in 1..=p {
                out.push(self.entry(i, j)?);
            }
        }
        Ok(out)
    }
}
