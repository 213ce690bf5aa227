//! Planted clique distributions: exact samplers, bit-packed storage and
//! closed-form edge marginals.
//!
//! Samplers draw from a [`RandomSource`] in a fixed order: all planted-set
//! choices first, then one fair bit per unforced pair (or hyperedge) in colex
//! rank order. Pairs inside the planted set are set to 1 without consuming a
//! bit. The planted set is returned beside the instance, never inside it.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::{binom, binom_big, pair_rank, subset_rank_unchecked, PackedBits};
use crate::error::{Error, Result};
use crate::tape::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphVariant {
    Er,
    Pc,
    Kpc,
    Clkpc,
}

impl GraphVariant {
    pub fn code(self) -> u8 {
        match self {
            GraphVariant::Er => 0,
            GraphVariant::Pc => 1,
            GraphVariant::Kpc => 2,
            GraphVariant::Clkpc => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => GraphVariant::Er,
            1 => GraphVariant::Pc,
            2 => GraphVariant::Kpc,
            3 => GraphVariant::Clkpc,
            c => return Err(Error::MalformedFile(format!("unknown graph variant code {c}"))),
        })
    }

    pub fn is_partite(self) -> bool {
        matches!(self, GraphVariant::Kpc | GraphVariant::Clkpc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypergraphVariant {
    Her,
    Hpc,
    Clhpc,
}

impl HypergraphVariant {
    pub fn code(self) -> u8 {
        match self {
            HypergraphVariant::Her => 0,
            HypergraphVariant::Hpc => 1,
            HypergraphVariant::Clhpc => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => HypergraphVariant::Her,
            1 => HypergraphVariant::Hpc,
            2 => HypergraphVariant::Clhpc,
            c => return Err(Error::MalformedFile(format!("unknown hypergraph variant code {c}"))),
        })
    }
}

/// Read access to an undirected simple graph on vertices `1..=n`.
pub trait GraphOracle: Send + Sync {
    fn vertex_count(&self) -> u32;

    /// Edge indicator for `i != j` in any order.
    fn edge(&self, i: u32, j: u32) -> Result<bool>;
}

/// Read access to an `s`-uniform hypergraph on vertices `1..=n`.
pub trait HypergraphOracle: Send + Sync {
    fn vertex_count(&self) -> u32;
    fn uniformity(&self) -> u32;

    /// Hyperedge indicator for a strictly increasing `s`-subset.
    fn hyperedge(&self, subset: &[u32]) -> Result<bool>;
}

impl<T: GraphOracle + ?Sized> GraphOracle for Arc<T> {
    fn vertex_count(&self) -> u32 {
        (**self).vertex_count()
    }
    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        (**self).edge(i, j)
    }
}

impl<T: GraphOracle + ?Sized> GraphOracle for &T {
    fn vertex_count(&self) -> u32 {
        (**self).vertex_count()
    }
    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        (**self).edge(i, j)
    }
}

impl<T: HypergraphOracle + ?Sized> HypergraphOracle for Arc<T> {
    fn vertex_count(&self) -> u32 {
        (**self).vertex_count()
    }
    fn uniformity(&self) -> u32 {
        (**self).uniformity()
    }
    fn hyperedge(&self, subset: &[u32]) -> Result<bool> {
        (**self).hyperedge(subset)
    }
}

impl<T: HypergraphOracle + ?Sized> HypergraphOracle for &T {
    fn vertex_count(&self) -> u32 {
        (**self).vertex_count()
    }
    fn uniformity(&self) -> u32 {
        (**self).uniformity()
    }
    fn hyperedge(&self, subset: &[u32]) -> Result<bool> {
        (**self).hyperedge(subset)
    }
}

pub(crate) fn check_pair(i: u32, j: u32, n: u32) -> Result<(u32, u32)> {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    if a == 0 || a == b || b > n {
        return Err(Error::MalformedSubset(format!("pair ({i}, {j}) with n = {n}")));
    }
    Ok((a, b))
}

pub(crate) fn check_subset(subset: &[u32], s: u32, n: u32) -> Result<()> {
    let ok = subset.len() == s as usize
        && subset.first().is_some_and(|&v| v >= 1)
        && subset.windows(2).all(|w| w[0] < w[1])
        && subset.last().is_some_and(|&v| v <= n);
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedSubset(format!("{subset:?} is not an increasing {s}-subset of [{n}]")))
    }
}

/// Parameters of a graph distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParams {
    pub variant: GraphVariant,
    pub n: u32,
    #[serde(default)]
    pub k: u32,
    #[serde(default)]
    pub ell: u32,
}

impl GraphParams {
    pub fn er(n: u32) -> Self {
        GraphParams { variant: GraphVariant::Er, n, k: 0, ell: 0 }
    }

    pub fn pc(n: u32, k: u32) -> Self {
        GraphParams { variant: GraphVariant::Pc, n, k, ell: 0 }
    }

    pub fn kpc(ell: u32, k: u32) -> Self {
        GraphParams { variant: GraphVariant::Kpc, n: ell * k, k, ell }
    }

    pub fn clkpc(ell: u32, k: u32) -> Self {
        GraphParams { variant: GraphVariant::Clkpc, n: ell * k, k, ell }
    }

    pub fn validate(&self) -> Result<()> {
        let GraphParams { variant, n, k, ell } = *self;
        if n == 0 {
            return Err(Error::param("graph needs at least one vertex"));
        }
        match variant {
            GraphVariant::Er => {
                if k != 0 {
                    return Err(Error::param("ER graphs have k = 0"));
                }
            }
            GraphVariant::Pc => {
                if k > n {
                    return Err(Error::param(format!("k = {k} exceeds n = {n}")));
                }
            }
            GraphVariant::Kpc | GraphVariant::Clkpc => {
                if ell == 0 || k == 0 || u64::from(ell) * u64::from(k) != u64::from(n) {
                    return Err(Error::param(format!("partite variant needs n = ell * k, got n={n} ell={ell} k={k}")));
                }
            }
        }
        Ok(())
    }
}

/// Parameters of an `s`-uniform hypergraph distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphParams {
    pub variant: HypergraphVariant,
    pub n: u32,
    pub s: u32,
    #[serde(default)]
    pub k: u32,
}

impl HypergraphParams {
    pub fn validate(&self) -> Result<()> {
        let HypergraphParams { variant, n, s, k } = *self;
        if s < 3 {
            return Err(Error::param(format!("uniformity s = {s} must be at least 3")));
        }
        if n < s {
            return Err(Error::param(format!("n = {n} smaller than s = {s}")));
        }
        match variant {
            HypergraphVariant::Her if k != 0 => Err(Error::param("HER hypergraphs have k = 0")),
            HypergraphVariant::Hpc if k > n => Err(Error::param(format!("k = {k} exceeds n = {n}"))),
            HypergraphVariant::Clhpc if k < s - 2 || k > n => {
                Err(Error::param(format!("clique-leakage hypergraph needs s-2 <= k <= n, got k = {k}")))
            }
            _ => Ok(()),
        }
    }
}

/// A planted-clique-family instance together with its hidden planted set.
#[derive(Debug, Clone)]
pub struct Labeled<T> {
    pub instance: T,
    /// Sorted planted vertices; `None` for null instances.
    pub planted: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInstance {
    params: GraphParams,
    edges: PackedBits,
}

impl GraphInstance {
    pub fn new(params: GraphParams, edges: PackedBits) -> Result<Self> {
        params.validate()?;
        let expected = binom(params.n.into(), 2);
        if edges.len() != expected {
            return Err(Error::param(format!("expected {expected} edge bits, got {}", edges.len())));
        }
        Ok(GraphInstance { params, edges })
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn edges(&self) -> &PackedBits {
        &self.edges
    }

    pub fn edge_by_rank(&self, rank: u64) -> bool {
        self.edges.get(rank)
    }
}

impl GraphOracle for GraphInstance {
    fn vertex_count(&self) -> u32 {
        self.params.n
    }

    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        let (a, b) = check_pair(i, j, self.params.n)?;
        Ok(self.edges.get(pair_rank(a, b)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypergraphInstance {
    params: HypergraphParams,
    hyperedges: PackedBits,
}

impl HypergraphInstance {
    pub fn new(params: HypergraphParams, hyperedges: PackedBits) -> Result<Self> {
        params.validate()?;
        let expected = binom(params.n.into(), params.s.into());
        if hyperedges.len() != expected {
            return Err(Error::param(format!("expected {expected} hyperedge bits, got {}", hyperedges.len())));
        }
        Ok(HypergraphInstance { params, hyperedges })
    }

    pub fn params(&self) -> &HypergraphParams {
        &self.params
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn s(&self) -> u32 {
        self.params.s
    }

    pub fn hyperedges(&self) -> &PackedBits {
        &self.hyperedges
    }
}

impl HypergraphOracle for HypergraphInstance {
    fn vertex_count(&self) -> u32 {
        self.params.n
    }

    fn uniformity(&self) -> u32 {
        self.params.s
    }

    fn hyperedge(&self, subset: &[u32]) -> Result<bool> {
        check_subset(subset, self.params.s, self.params.n)?;
        Ok(self.hyperedges.get(subset_rank_unchecked(subset)))
    }
}

/// Floyd's algorithm: a uniform `k`-subset of `offset+1 ..= offset+n`,
/// drawing `below(j)` for `j = n-k+1, ..., n`.
fn floyd_subset(rng: &mut dyn RandomSource, n: u32, k: u32, offset: u32) -> Vec<u32> {
    let mut set: Vec<u32> = Vec::with_capacity(k as usize);
    for j in (n - k + 1)..=n {
        let t = rng.below(u64::from(j)) as u32 + 1;
        let pick = if set.contains(&t) { j } else { t };
        let pos = set.partition_point(|&x| x < pick);
        set.insert(pos, pick);
    }
    set.into_iter().map(|v| v + offset).collect()
}

/// Draws the planted set for `params`; `None` for ER.
pub fn sample_planted(params: &GraphParams, rng: &mut dyn RandomSource) -> Result<Option<Vec<u32>>> {
    params.validate()?;
    let GraphParams { variant, n, k, ell } = *params;
    Ok(match variant {
        GraphVariant::Er => None,
        GraphVariant::Pc => Some(floyd_subset(rng, n, k, 0)),
        GraphVariant::Kpc => Some((0..k).map(|b| b * ell + rng.below(ell.into()) as u32 + 1).collect()),
        GraphVariant::Clkpc => {
            Some(std::iter::once(1).chain((1..k).map(|b| b * ell + rng.below(ell.into()) as u32 + 1)).collect())
        }
    })
}

/// Exact sampler for every graph variant.
pub fn sample_graph(params: &GraphParams, rng: &mut dyn RandomSource) -> Result<Labeled<GraphInstance>> {
    let planted = sample_planted(params, rng)?;
    let n = params.n;
    let mut member = vec![false; n as usize + 1];
    for &v in planted.iter().flatten() {
        member[v as usize] = true;
    }
    let mut edges = PackedBits::zeros(binom(n.into(), 2));
    let mut rank = 0u64;
    for j in 2..=n {
        for i in 1..j {
            let bit = (member[i as usize] && member[j as usize]) || rng.bit();
            edges.set(rank, bit);
            rank += 1;
        }
    }
    Ok(Labeled { instance: GraphInstance { params: *params, edges }, planted })
}

/// Advances an increasing subset of `[n]` to its colex successor.
pub(crate) fn next_colex(subset: &mut [u32], n: u32) -> bool {
    let s = subset.len();
    for t in 0..s {
        let limit = if t + 1 < s { subset[t + 1] } else { n + 1 };
        if subset[t] + 1 < limit {
            subset[t] += 1;
            for (u, v) in subset.iter_mut().enumerate().take(t) {
                *v = u as u32 + 1;
            }
            return true;
        }
    }
    false
}

pub fn sample_hypergraph_planted(params: &HypergraphParams, rng: &mut dyn RandomSource) -> Result<Option<Vec<u32>>> {
    params.validate()?;
    let HypergraphParams { variant, n, s, k } = *params;
    Ok(match variant {
        HypergraphVariant::Her => None,
        HypergraphVariant::Hpc => Some(floyd_subset(rng, n, k, 0)),
        HypergraphVariant::Clhpc => {
            let forced = s - 2;
            let mut set: Vec<u32> = (1..=forced).collect();
            set.extend(floyd_subset(rng, n - forced, k - forced, forced));
            Some(set)
        }
    })
}

/// Exact sampler for every hypergraph variant.
pub fn sample_hypergraph(params: &HypergraphParams, rng: &mut dyn RandomSource) -> Result<Labeled<HypergraphInstance>> {
    let planted = sample_hypergraph_planted(params, rng)?;
    let HypergraphParams { n, s, .. } = *params;
    let mut member = vec![false; n as usize + 1];
    for &v in planted.iter().flatten() {
        member[v as usize] = true;
    }
    let total = binom(n.into(), s.into());
    let mut bits = PackedBits::zeros(total);
    let mut subset: Vec<u32> = (1..=s).collect();
    for rank in 0..total {
        let forced = subset.iter().all(|&v| member[v as usize]);
        bits.set(rank, forced || rng.bit());
        next_colex(&mut subset, n);
    }
    Ok(Labeled { instance: HypergraphInstance { params: *params, hyperedges: bits }, planted })
}

/// A distribution whose edge marginals [`marginal`] can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Graph(GraphParams),
    Hypergraph(HypergraphParams),
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

fn ratio(num: num_bigint::BigUint, den: num_bigint::BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact probability that the given pair or hyperedge is present.
pub fn marginal(spec: &DistributionSpec, subset: &[u32]) -> Result<BigRational> {
    // P(bit) = 1/2 + 1/2 * P(subset inside planted set)
    let inside = match *spec {
        DistributionSpec::Graph(p) => {
            p.validate()?;
            if subset.len() != 2 {
                return Err(Error::MalformedSubset(format!("{subset:?} is not a pair")));
            }
            let (i, j) = check_pair(subset[0], subset[1], p.n)?;
            graph_pair_in_clique(&p, i, j)
        }
        DistributionSpec::Hypergraph(p) => {
            p.validate()?;
            check_subset(subset, p.s, p.n)?;
            hyper_subset_in_clique(&p, subset)
        }
    };
    Ok(half() + half() * inside)
}

fn graph_pair_in_clique(p: &GraphParams, i: u32, j: u32) -> BigRational {
    let n = u64::from(p.n);
    let k = u64::from(p.k);
    let block = |v: u32| (v - 1) / p.ell;
    match p.variant {
        GraphVariant::Er => BigRational::zero(),
        GraphVariant::Pc => {
            if k < 2 {
                BigRational::zero()
            } else {
                ratio(binom_big(n - 2, k - 2), binom_big(n, k))
            }
        }
        GraphVariant::Kpc => {
            if block(i) == block(j) {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::one(), BigInt::from(u64::from(p.ell).pow(2)))
            }
        }
        GraphVariant::Clkpc => {
            if block(i) == block(j) {
                return BigRational::zero();
            }
            // vertex 1 is the representative of block 0
            let pin = |v: u32| -> BigRational {
                if v == 1 {
                    BigRational::one()
                } else if block(v) == 0 {
                    BigRational::zero()
                } else {
                    BigRational::new(BigInt::one(), BigInt::from(p.ell))
                }
            };
            pin(i) * pin(j)
        }
    }
}

fn hyper_subset_in_clique(p: &HypergraphParams, subset: &[u32]) -> BigRational {
    let n = u64::from(p.n);
    let k = u64::from(p.k);
    let s = subset.len() as u64;
    match p.variant {
        HypergraphVariant::Her => BigRational::zero(),
        HypergraphVariant::Hpc => {
            if k < s {
                BigRational::zero()
            } else {
                ratio(binom_big(n - s, k - s), binom_big(n, k))
            }
        }
        HypergraphVariant::Clhpc => {
            let forced = u64::from(p.s) - 2;
            let free = subset.iter().filter(|&&v| u64::from(v) > forced).count() as u64;
            let (nf, kf) = (n - forced, k - forced);
            if kf < free {
                BigRational::zero()
            } else {
                ratio(binom_big(nf - free, kf - free), binom_big(nf, kf))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::BitStream;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pc_whole_graph_is_clique() {
        for seed in 0..20 {
            let g = sample_graph(&GraphParams::pc(2, 2), &mut BitStream::new(seed)).unwrap();
            assert!(g.instance.edge(1, 2).unwrap());
            assert_eq!(g.planted, Some(vec![1, 2]));
        }
    }

    #[test]
    fn hpc_single_hyperedge_forced() {
        let p = HypergraphParams { variant: HypergraphVariant::Hpc, n: 3, s: 3, k: 3 };
        for seed in 0..20 {
            let h = sample_hypergraph(&p, &mut BitStream::new(seed)).unwrap();
            assert!(h.instance.hyperedge(&[1, 2, 3]).unwrap());
        }
    }

    #[test]
    fn structural_invariants_hold() {
        for seed in 0..50 {
            let mut rng = BitStream::new(seed);
            let g = sample_graph(&GraphParams::kpc(3, 4), &mut rng).unwrap();
            let planted = g.planted.unwrap();
            assert_eq!(planted.len(), 4);
            for (b, &v) in planted.iter().enumerate() {
                assert_eq!((v - 1) / 3, b as u32);
            }
            for (x, &a) in planted.iter().enumerate() {
                for &b in &planted[x + 1..] {
                    assert!(g.instance.edge(a, b).unwrap());
                }
            }
            let g = sample_graph(&GraphParams::clkpc(3, 4), &mut rng).unwrap();
            assert_eq!(g.planted.unwrap()[0], 1);

            let p = HypergraphParams { variant: HypergraphVariant::Clhpc, n: 8, s: 4, k: 5 };
            let h = sample_hypergraph(&p, &mut rng).unwrap();
            let planted = h.planted.unwrap();
            assert_eq!(&planted[..2], &[1, 2]);
            assert_eq!(planted.len(), 5);
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(sample_graph(&GraphParams { variant: GraphVariant::Kpc, n: 5, k: 2, ell: 2 }, &mut BitStream::new(0))
            .is_err());
        assert!(sample_graph(&GraphParams::pc(3, 4), &mut BitStream::new(0)).is_err());
        let p = HypergraphParams { variant: HypergraphVariant::Hpc, n: 5, s: 2, k: 2 };
        assert!(sample_hypergraph(&p, &mut BitStream::new(0)).is_err());
        let p = HypergraphParams { variant: HypergraphVariant::Clhpc, n: 5, s: 4, k: 1 };
        assert!(sample_hypergraph(&p, &mut BitStream::new(0)).is_err());
    }

    #[test]
    fn marginal_examples() {
        let er = DistributionSpec::Graph(GraphParams::er(5));
        assert_eq!(marginal(&er, &[2, 4]).unwrap(), r(1, 2));
        let pc = DistributionSpec::Graph(GraphParams::pc(4, 2));
        assert_eq!(marginal(&pc, &[1, 2]).unwrap(), r(7, 12));
        let kpc = DistributionSpec::Graph(GraphParams::kpc(2, 2));
        assert_eq!(marginal(&kpc, &[1, 3]).unwrap(), r(5, 8));
        assert_eq!(marginal(&kpc, &[1, 2]).unwrap(), r(1, 2));
        let cl = DistributionSpec::Graph(GraphParams::clkpc(3, 3));
        assert_eq!(marginal(&cl, &[1, 4]).unwrap(), r(1, 2) + r(1, 2) * r(1, 3));
        assert_eq!(marginal(&cl, &[2, 4]).unwrap(), r(1, 2));
        assert_eq!(marginal(&cl, &[4, 7]).unwrap(), r(1, 2) + r(1, 2) * r(1, 9));
    }

    #[test]
    fn colex_successor_walks_all_subsets() {
        let mut s = vec![1, 2, 3];
        let mut count = 1;
        let mut prev = subset_rank_unchecked(&s);
        while next_colex(&mut s, 6) {
            let r = subset_rank_unchecked(&s);
            assert_eq!(r, prev + 1);
            prev = r;
            count += 1;
        }
        assert_eq!(count, binom(6, 3));
    }
}
