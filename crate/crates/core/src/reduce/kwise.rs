//! Planted clique to testing almost k-wise independence.
//!
//! `B ∈ {0,1}^{n × n̄}`: the adjacency matrix with random bits on the diagonal,
//! padded with `n̄ − n` columns of random bits. The output is `s̄` rows of `B`
//! picked uniformly at random.
//!
//! rand layout: `n` diagonal bits, then the padding columns row by row
//! (`n·(n̄−n)` bits), then `s̄` row indices of `ell_exp` bits each, most
//! significant first (`ρ = value + 1`).

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{check, rational_string, Frac, RegionCheck};
use crate::bits::{bits_for, PackedBits};
use crate::error::{Error, Result};
use crate::graph::GraphOracle;
use crate::tape::{BitTape, WorkspaceMeter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KwiseParams {
    pub alpha: Frac,
    pub ell_exp: u32,
    pub k: u64,
    pub s_bar: u64,
    pub k_bar: u32,
    pub n_bar: u64,
    /// `2α log₂²(n̄) / n̄^α = 2k̄² / (α 2^k̄)` as "num/den".
    pub eps: String,
    /// `(k−2) / n̄^α = (k−2) / 2^k̄` as "num/den".
    pub eps_prime: String,
    pub region: Vec<RegionCheck>,
}

/// Matrix shape and sample count, independent of how `n̄` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KwiseLayout {
    pub ell_exp: u32,
    pub n: u64,
    pub n_bar: u64,
    pub s_bar: u64,
}

impl KwiseLayout {
    pub fn new(ell_exp: u32, n_bar: u64, s_bar: u64) -> Result<Self> {
        if ell_exp == 0 || ell_exp > 31 {
            return Err(Error::param(format!("ell_exp = {ell_exp} must be in 1..=31")));
        }
        let n = 1u64 << ell_exp;
        if n_bar < n {
            return Err(Error::param(format!("n_bar = {n_bar} is smaller than n = {n}")));
        }
        Ok(KwiseLayout { ell_exp, n, n_bar, s_bar })
    }

    /// `n + n·(n̄ − n) + ell_exp·s̄`.
    pub fn rand_len(&self) -> u64 {
        self.n + self.n * (self.n_bar - self.n) + u64::from(self.ell_exp) * self.s_bar
    }

    pub fn rand_formula(&self) -> String {
        format!("{} + {}*({} - {}) + {}*{}", self.n, self.n, self.n_bar, self.n, self.ell_exp, self.s_bar)
    }
}

impl KwiseParams {
    pub fn derive(alpha: Frac, ell_exp: u32, k: u64, s_bar: u64) -> Result<Self> {
        if alpha.num == 0 || alpha.num > alpha.den {
            return Err(Error::param(format!("alpha = {alpha} not in (0, 1]")));
        }
        if ell_exp == 0 {
            return Err(Error::param("ell_exp must be positive"));
        }
        let k_bar = 1 + ell_exp;
        let num = u64::from(k_bar) * alpha.den;
        if !num.is_multiple_of(alpha.num) {
            return Err(Error::Divisibility(format!("k_bar/alpha = {k_bar}/({alpha}) is not an integer")));
        }
        let exp = num / alpha.num;
        if exp > 40 {
            return Err(Error::TooLarge(format!("n_bar = 2^{exp}")));
        }
        let n_bar = 1u64 << exp;
        let two_k = BigInt::from(1u64 << k_bar);
        let eps =
            BigRational::new(BigInt::from(2 * u64::from(k_bar).pow(2) * alpha.den), BigInt::from(alpha.num) * &two_k);
        let eps_p = BigRational::new(BigInt::from(k as i64 - 2), two_k);
        let zero = BigRational::from_integer(0.into());
        let one = BigRational::from_integer(1.into());
        let region =
            vec![check("0 < eps", eps > zero), check("eps < eps'", eps < eps_p), check("eps' < 1", eps_p < one)];
        Ok(KwiseParams {
            alpha,
            ell_exp,
            k,
            s_bar,
            k_bar,
            n_bar,
            eps: rational_string(&eps),
            eps_prime: rational_string(&eps_p),
            region,
        })
    }

    pub fn in_region(&self) -> bool {
        self.region.iter().all(|c| c.holds)
    }

    pub fn layout(&self) -> KwiseLayout {
        KwiseLayout { ell_exp: self.ell_exp, n: 1 << self.ell_exp, n_bar: self.n_bar, s_bar: self.s_bar }
    }
}

/// `s̄` samples in `{0,1}^n̄`, each bit computed on demand.
pub struct KwiseInstance<G> {
    layout: KwiseLayout,
    sub: G,
    rand: BitTape,
}

pub fn kwise_reduce<G: GraphOracle>(sub: G, layout: KwiseLayout, rand: BitTape) -> Result<KwiseInstance<G>> {
    if u64::from(sub.vertex_count()) != layout.n {
        return Err(Error::param(format!(
            "sub-instance has {} vertices, expected n = {}",
            sub.vertex_count(),
            layout.n
        )));
    }
    let need = layout.rand_len();
    if rand.len() < need {
        return Err(Error::InsufficientRandomness { needed: need, available: rand.len() });
    }
    Ok(KwiseInstance { layout, sub, rand })
}

impl<G: GraphOracle> KwiseInstance<G> {
    pub fn layout(&self) -> &KwiseLayout {
        &self.layout
    }

    pub fn rand(&self) -> &BitTape {
        &self.rand
    }

    /// `B(r, c)` for `r ∈ [n]`, `c ∈ [n̄]`.
    pub fn b(&self, r: u64, c: u64) -> Result<bool> {
        let KwiseLayout { n, n_bar, .. } = self.layout;
        if r == 0 || r > n || c == 0 || c > n_bar {
            return Err(Error::param(format!("B({r}, {c}) outside {n}x{n_bar}")));
        }
        if c == r {
            self.rand.read(r - 1)
        } else if c <= n {
            self.sub.edge(r as u32, c as u32)
        } else {
            self.rand.read(n + (r - 1) * (n_bar - n) + (c - n - 1))
        }
    }

    /// `ρ_t`, the row used by sample `t ∈ [s̄]`.
    pub fn row(&self, t: u64) -> Result<u64> {
        let KwiseLayout { n, n_bar, ell_exp, s_bar } = self.layout;
        if t == 0 || t > s_bar {
            return Err(Error::param(format!("sample {t} outside [1, {s_bar}]")));
        }
        let off = n + n * (n_bar - n) + (t - 1) * u64::from(ell_exp);
        Ok(self.rand.read_uint(off, ell_exp)? as u64 + 1)
    }

    /// Bit `c ∈ [n̄]` of sample `t ∈ [s̄]`.
    pub fn bit(&self, t: u64, c: u64) -> Result<bool> {
        self.bit_metered(t, c, None)
    }

    pub fn bit_metered(&self, t: u64, c: u64, meter: Option<&WorkspaceMeter>) -> Result<bool> {
        let _t = meter.map(|m| m.counter("kwise.t", self.layout.s_bar)).transpose()?;
        let _c = meter.map(|m| m.counter("kwise.c", self.layout.n_bar)).transpose()?;
        let _r = meter.map(|m| m.charge("kwise.row", bits_for(self.layout.n))).transpose()?;
        let r = self.row(t)?;
        self.b(r, c)
    }

    /// All samples, row-major.
    pub fn samples(&self) -> Result<PackedBits> {
        let KwiseLayout { n_bar, s_bar, .. } = self.layout;
        let mut out = PackedBits::zeros(n_bar * s_bar);
        for t in 1..=s_bar {
            let r = self.row(t)?;
            for c in 1..=n_bar {
                out.set((t - 1) * n_bar + (c - 1), self.b(r, c)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_graph, GraphParams};
    use crate::tape::BitStream;

    #[test]
    fn params() {
        let p = KwiseParams::derive(Frac::new(1, 1).unwrap(), 4, 10, 64).unwrap();
        assert_eq!(p.k_bar, 5);
        assert_eq!(p.n_bar, 32);
        assert_eq!(p.eps, "25/16");
        assert_eq!(p.eps_prime, "1/4");
        assert!(!p.in_region());
        assert_eq!(p.layout().rand_len(), 16 + 16 * 16 + 4 * 64);
        let p = KwiseParams::derive(Frac::new(1, 2).unwrap(), 4, 10, 64).unwrap();
        assert_eq!(p.n_bar, 1024);
        assert!(KwiseParams::derive(Frac::new(2, 3).unwrap(), 4, 10, 64).is_err());
        assert!(KwiseParams::derive(Frac::new(3, 2).unwrap(), 4, 10, 64).is_err());
    }

    #[test]
    fn samples_follow_rows() {
        let mut s = BitStream::new(5);
        let g = sample_graph(&GraphParams::er(8), &mut s).unwrap().instance;
        let layout = KwiseLayout::new(3, 8, 20).unwrap();
        assert_eq!(layout.rand_len(), 8 + 60);
        let inst = kwise_reduce(&g, layout, s.tape(layout.rand_len())).unwrap();
        for t in 1..=20 {
            let r = inst.row(t).unwrap();
            assert!((1..=8).contains(&r));
            for c in 1..=8u64 {
                let expect =
                    if c == r { inst.rand().read(r - 1).unwrap() } else { g.edge(r as u32, c as u32).unwrap() };
                assert_eq!(inst.bit(t, c).unwrap(), expect);
            }
        }
        assert!(inst.bit(21, 1).is_err());
        assert!(kwise_reduce(&g, layout, s.tape(layout.rand_len() - 1)).is_err());
    }
}
