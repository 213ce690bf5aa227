//! Planted clique to Sparse PCA.
//!
//! `Ā` is `d̄ × n̄`: row `i ≤ (n−m)/2` is row `(n−m)/2 + i` of the adjacency
//! matrix cut to its first `n̄` columns, later rows are random bits.
//! `B̄(i, j) = Ā(π_d̄(i), π_n̄(j))` and `X_j = η_j (2 B̄_j − 1)`.
//!
//! rand layout, in order: the fill rows of `Ā` (row-major, `(d̄−(n−m)/2)·n̄`
//! bits), a `10 d̄ ⌈log₂ d̄⌉²` segment for `π_d̄`, a segment of the same size
//! whose first `10 n̄ ⌈log₂ n̄⌉²` bits give `π_n̄`, then `n̄` sign bits (1 means
//! `η = +1`).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{check, failures, rational_string, Frac, RegionCheck};
use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::graph::GraphOracle;
use crate::permute::{default_perm_bits, read_range, PermFn};
use crate::tape::{BitTape, WorkspaceMeter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpcaParams {
    pub n: u64,
    pub m: u64,
    pub k: u64,
    pub mu: Frac,
    pub delta: Frac,
    pub d_bar: u64,
    pub n_bar: u64,
    pub k_bar: u64,
    /// `(k̄−1)k / (n−m)` in lowest terms, as "num/den".
    pub theta_bar: String,
    /// The inequalities defining the admissible region, evaluated.
    pub region: Vec<RegionCheck>,
}

impl SpcaParams {
    pub fn half(&self) -> u64 {
        (self.n - self.m) / 2
    }

    pub fn theta(&self) -> BigRational {
        BigRational::new(BigInt::from((self.k_bar - 1) * self.k), BigInt::from(self.n - self.m))
    }

    pub fn in_region(&self) -> bool {
        self.region.iter().all(|c| c.holds)
    }

    /// Errors with the failed inequalities unless all of them hold.
    pub fn require_region(&self) -> Result<()> {
        let bad = failures(&self.region);
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::RmuViolation(bad))
        }
    }

    pub fn perm_segment(&self) -> u64 {
        let c = u64::from(ceil_log2(self.d_bar));
        10 * self.d_bar * c * c
    }

    /// `(d̄ − (n−m)/2)·n̄ + 2·10 d̄ ⌈log₂ d̄⌉² + n̄`.
    pub fn rand_len(&self) -> u64 {
        (self.d_bar - self.half()) * self.n_bar + 2 * self.perm_segment() + self.n_bar
    }

    pub fn rand_formula(&self) -> String {
        format!(
            "({} - {})*{} + 2*10*{}*{}^2 + {}",
            self.d_bar,
            self.half(),
            self.n_bar,
            self.d_bar,
            ceil_log2(self.d_bar),
            self.n_bar
        )
    }
}

/// Derives `n̄`, `k̄`, `θ̄` exactly and evaluates the admissible region.
///
/// The structural conditions (`δ ∈ (0, 1/6)`, `μ ∈ [1/3, 1/2 − δ)`, `n−m`
/// even, `d̄ > (n−m)/2`) are errors; the region inequalities are only
/// recorded, see [`SpcaParams::require_region`].
pub fn spca_derive_params(n: u64, m: u64, k: u64, mu: Frac, delta: Frac, d_bar: u64) -> Result<SpcaParams> {
    let mut bad = Vec::new();
    let d = delta.to_rational();
    let muq = mu.to_rational();
    let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    if !(d > r(0, 1) && d < r(1, 6)) {
        bad.push(format!("delta = {delta} not in (0, 1/6)"));
    }
    if !(muq >= r(1, 3) && muq < r(1, 2) - &d) {
        bad.push(format!("mu = {mu} not in [1/3, 1/2 - delta)"));
    }
    if m >= n || k == 0 {
        bad.push(format!("need m < n and k > 0 (n = {n}, m = {m}, k = {k})"));
    } else {
        if !(n - m).is_multiple_of(2) {
            bad.push(format!("n - m = {} is odd", n - m));
        }
        if 2 * d_bar <= n - m {
            bad.push(format!("d_bar = {d_bar} too small: need d_bar > (n-m)/2 = {}", (n - m) / 2));
        }
    }
    if !bad.is_empty() {
        return Err(Error::RmuViolation(bad));
    }
    let nm = n - m;
    // n̄ = smallest N with N^(b−a) · k^b ≥ (4(n−m))^b, where mu = a/b
    let (a, b) = (mu.num, mu.den);
    let e = u32::try_from(b - a).map_err(|_| Error::param("mu denominator too large"))?;
    let bb = u32::try_from(b).map_err(|_| Error::param("mu denominator too large"))?;
    let target = BigUint::from(4 * nm).pow(bb);
    let kb = BigUint::from(k).pow(bb);
    let ok = |x: u64| BigUint::from(x).pow(e) * &kb >= target;
    let mut hi = 1u64;
    while !ok(hi) {
        hi = hi.checked_mul(2).ok_or_else(|| Error::param("n_bar overflows"))?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n_bar = hi;
    let k_bar = (n_bar * k).div_ceil(4 * nm);

    let au = u32::try_from(a).map_err(|_| Error::param("mu numerator too large"))?;
    let region = vec![
        check(
            "15*sqrt(k_bar*ln(120*e*d_bar)/n_bar) <= 1",
            15.0 * (k_bar as f64 * (120.0 * std::f64::consts::E * d_bar as f64).ln() / n_bar as f64).sqrt() <= 1.0,
        ),
        check("k_bar <= d_bar^0.49", BigUint::from(k_bar).pow(100) <= BigUint::from(d_bar).pow(49)),
        check("n_bar^mu <= k_bar", BigUint::from(n_bar).pow(au) <= BigUint::from(k_bar).pow(bb)),
        check("n_bar < d_bar", n_bar < d_bar),
    ];
    let theta = BigRational::new(BigInt::from((k_bar.max(1) - 1) * k), BigInt::from(nm));
    Ok(SpcaParams { n, m, k, mu, delta, d_bar, n_bar, k_bar, theta_bar: rational_string(&theta), region })
}

/// `n̄` samples in `{−1, +1}^d̄`, each entry computed on demand.
pub struct SpcaInstance<G> {
    params: SpcaParams,
    sub: G,
    rand: BitTape,
    pi_d: PermFn,
    pi_n: PermFn,
}

pub fn spca_reduce<G: GraphOracle>(sub: G, params: &SpcaParams, rand: BitTape) -> Result<SpcaInstance<G>> {
    let half = params.half();
    if u64::from(sub.vertex_count()) != params.n - params.m {
        return Err(Error::param(format!(
            "sub-instance has {} vertices, expected n - m = {}",
            sub.vertex_count(),
            params.n - params.m
        )));
    }
    if params.n_bar > half {
        return Err(Error::param(format!(
            "n_bar = {} exceeds (n-m)/2 = {half}, so the columns would overlap the rows",
            params.n_bar
        )));
    }
    let need = params.rand_len();
    if rand.len() < need {
        return Err(Error::InsufficientRandomness { needed: need, available: rand.len() });
    }
    let fill = (params.d_bar - half) * params.n_bar;
    let seg = params.perm_segment();
    let d = u32::try_from(params.d_bar).map_err(|_| Error::param("d_bar too large"))?;
    let nb = u32::try_from(params.n_bar).map_err(|_| Error::param("n_bar too large"))?;
    let pi_d = PermFn::from_bits(d, read_range(&rand, fill, seg)?)?;
    let pi_n = PermFn::from_bits(nb, read_range(&rand, fill + seg, default_perm_bits(nb).min(seg))?)?;
    Ok(SpcaInstance { params: params.clone(), sub, rand, pi_d, pi_n })
}

impl<G: GraphOracle> SpcaInstance<G> {
    pub fn params(&self) -> &SpcaParams {
        &self.params
    }

    pub fn rand(&self) -> &BitTape {
        &self.rand
    }

    pub fn perms(&self) -> (&PermFn, &PermFn) {
        (&self.pi_d, &self.pi_n)
    }

    fn a_bar(&self, row: u64, col: u64) -> Result<bool> {
        let half = self.params.half();
        if row <= half {
            self.sub.edge((half + row) as u32, col as u32)
        } else {
            self.rand.read((row - half - 1) * self.params.n_bar + (col - 1))
        }
    }

    /// `η_j` as a sign.
    pub fn sign(&self, j: u64) -> Result<i8> {
        let off = (self.params.d_bar - self.params.half()) * self.params.n_bar + 2 * self.params.perm_segment();
        Ok(if self.rand.read(off + j - 1)? { 1 } else { -1 })
    }

    /// Entry `i ∈ [d̄]` of sample `j ∈ [n̄]`.
    pub fn entry(&self, i: u64, j: u64) -> Result<i8> {
        self.entry_metered(i, j, None)
    }

    pub fn entry_metered(&self, i: u64, j: u64, meter: Option<&WorkspaceMeter>) -> Result<i8> {
        if i == 0 || i > self.params.d_bar || j == 0 || j > self.params.n_bar {
            return Err(Error::param(format!("entry ({i}, {j}) outside {}x{}", self.params.d_bar, self.params.n_bar)));
        }
        let _ij = meter.map(|m| m.counter("spca.i", self.params.d_bar)).transpose()?;
        let _jj = meter.map(|m| m.counter("spca.j", self.params.n_bar)).transpose()?;
        let _row = meter.map(|m| m.counter("spca.row", self.params.d_bar)).transpose()?;
        let _col = meter.map(|m| m.counter("spca.col", self.params.n_bar)).transpose()?;
        let row = u64::from(self.pi_d.eval(i as u32));
        let col = u64::from(self.pi_n.eval(j as u32));
        let b = if self.a_bar(row, col)? { 1 } else { -1 };
        Ok(self.sign(j)? * b)
    }

    /// Sample `j` as a vector.
    pub fn sample(&self, j: u64) -> Result<Vec<i8>> {
        (1..=self.params.d_bar).map(|i| self.entry(i, j)).collect()
    }
}
