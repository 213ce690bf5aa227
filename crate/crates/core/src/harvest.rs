//! Randomness harvesting: split one instance into a smaller sub-instance and a
//! multiple-access random tape built from disjoint source bits.
//!
//! Every rand tape enumerates its qualifying edges (or hyperedges) in colex
//! rank order. For `pc-basic`, `kpc-basic` and `clhpc` those edges form a
//! suffix of the source bit array, so bit `p` of the tape is source bit
//! `offset + p`. `kpc-advanced` walks the pairs of the last block of vertices,
//! and `clkpc` walks the pairs of the vertices that are not adjacent to
//! vertex 1, located lazily by counting.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::bits::{binom, edge_unrank, pair_rank, subset_rank_unchecked};
use crate::error::{Error, Result};
use crate::graph::{check_pair, GraphInstance, GraphOracle, GraphVariant, HypergraphInstance, HypergraphVariant};
use crate::tape::{AccessPolicy, BitOracle, BitTape, WorkspaceMeter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    PcBasic,
    KpcBasic,
    KpcAdvanced,
    Clkpc,
    Clhpc,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::PcBasic => "pc-basic",
            Scheme::KpcBasic => "kpc-basic",
            Scheme::KpcAdvanced => "kpc-advanced",
            Scheme::Clkpc => "clkpc",
            Scheme::Clhpc => "clhpc",
        }
    }

    pub fn ordering(self) -> &'static str {
        match self {
            Scheme::PcBasic | Scheme::KpcBasic => {
                "colex rank order of source edges with an endpoint among the last m vertices (source ranks C(n-m,2)..C(n,2))"
            }
            Scheme::KpcAdvanced => "colex rank order of pairs of the last ell*k vertices, relative to that block",
            Scheme::Clkpc => {
                "colex rank order of pairs among the last 3*ell*k vertices with no edge to vertex 1, in their scan order; truncated to C(ell*k,2)"
            }
            Scheme::Clhpc => "colex rank order of hyperedges containing the last vertex (source ranks C(N-1,s)..C(N,s))",
        }
    }
}

/// Scheme parameters, in the notation of the corresponding harvesting
/// argument: `k` is the planted size of the *target* shape, and the source
/// must have `n`, `ell*k`, `ell*2k`, `ell*4k` or `n+s-1` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SchemeParams {
    PcBasic { k: u32, m: u32 },
    KpcBasic { ell: u32, k: u32, k_s: u32, m: u32 },
    KpcAdvanced { ell: u32, k: u32, k_s: u32 },
    Clkpc { ell: u32, k: u32, k_s: u32 },
    Clhpc { k: u32 },
}

impl SchemeParams {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeParams::PcBasic { .. } => Scheme::PcBasic,
            SchemeParams::KpcBasic { .. } => Scheme::KpcBasic,
            SchemeParams::KpcAdvanced { .. } => Scheme::KpcAdvanced,
            SchemeParams::Clkpc { .. } => Scheme::Clkpc,
            SchemeParams::Clhpc { .. } => Scheme::Clhpc,
        }
    }

    /// Closed-form budget and its formula, given the source vertex count and
    /// uniformity (`s` is ignored for graph schemes).
    pub fn budget(&self, src_n: u32, s: u32) -> (String, u64) {
        let c2 = |x: u32| binom(x.into(), 2);
        match *self {
            SchemeParams::PcBasic { m, .. } => {
                (format!("C({src_n},2) - C({},2)", src_n - m), c2(src_n) - c2(src_n.saturating_sub(m)))
            }
            SchemeParams::KpcBasic { ell, k, m, .. } => {
                let n = ell * k;
                (format!("C({n},2) - C({},2)", n - m), c2(n) - c2(n.saturating_sub(m)))
            }
            SchemeParams::KpcAdvanced { ell, k, .. } | SchemeParams::Clkpc { ell, k, .. } => {
                (format!("C({},2)", ell * k), c2(ell * k))
            }
            SchemeParams::Clhpc { .. } => {
                let n = src_n - s + 1;
                (format!("C({},{})", n + s - 2, s - 1), binom((n + s - 2).into(), (s - 1).into()))
            }
        }
    }
}

/// Source-bit ranks touched through each half of a view.
#[derive(Debug, Default)]
pub struct AccessLog {
    sub: Mutex<BTreeSet<u64>>,
    rand: Mutex<BTreeSet<u64>>,
}

impl AccessLog {
    pub fn sub_ranks(&self) -> BTreeSet<u64> {
        self.sub.lock().unwrap().clone()
    }

    pub fn rand_ranks(&self) -> BTreeSet<u64> {
        self.rand.lock().unwrap().clone()
    }

    pub fn is_disjoint(&self) -> bool {
        let sub = self.sub.lock().unwrap();
        let rand = self.rand.lock().unwrap();
        sub.is_disjoint(&rand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Sub,
    Rand,
}

#[derive(Clone)]
struct Probe {
    log: Option<Arc<AccessLog>>,
    role: Role,
}

impl Probe {
    #[inline]
    fn touch(&self, rank: u64) {
        if let Some(log) = &self.log {
            let set = match self.role {
                Role::Sub => &log.sub,
                Role::Rand => &log.rand,
            };
            set.lock().unwrap().insert(rank);
        }
    }
}

#[derive(Clone, Default)]
pub struct HarvestOptions {
    /// Record every source rank touched by `sub` and by `rand`.
    pub trace: bool,
    /// Meter charged by the lazy non-neighbour scan of `clkpc`.
    pub meter: Option<Arc<WorkspaceMeter>>,
}

/// Shape of the sub-instance a view presents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubShape {
    pub n: u32,
    pub k: u32,
    /// Block size for partite shapes, 0 otherwise.
    pub ell: u32,
    pub variant: GraphVariant,
}

#[derive(Clone)]
enum SubSource {
    Prefix(Arc<GraphInstance>),
    // graph edge (i, j) = hyperedge {1, ..., s-2, i+s-2, j+s-2}
    Link(Arc<HypergraphInstance>),
}

/// The sub-instance half of a view, presented as a graph on `1..=shape.n`.
#[derive(Clone)]
pub struct SubGraph {
    shape: SubShape,
    source: SubSource,
    probe: Probe,
}

impl SubGraph {
    pub fn shape(&self) -> &SubShape {
        &self.shape
    }
}

impl GraphOracle for SubGraph {
    fn vertex_count(&self) -> u32 {
        self.shape.n
    }

    fn edge(&self, i: u32, j: u32) -> Result<bool> {
        let (a, b) = check_pair(i, j, self.shape.n)?;
        match &self.source {
            SubSource::Prefix(g) => {
                let rank = pair_rank(a, b);
                self.probe.touch(rank);
                Ok(g.edge_by_rank(rank))
            }
            SubSource::Link(h) => {
                let s = h.s();
                let mut subset: Vec<u32> = (1..=s - 2).collect();
                subset.push(a + s - 2);
                subset.push(b + s - 2);
                let rank = subset_rank_unchecked(&subset);
                self.probe.touch(rank);
                Ok(h.hyperedges().get(rank))
            }
        }
    }
}

/// Source bits `offset .. offset + len` of a graph or hypergraph.
struct SuffixOracle {
    bits: Arc<dyn Fn(u64) -> bool + Send + Sync>,
    offset: u64,
    len: u64,
    probe: Probe,
}

impl BitOracle for SuffixOracle {
    fn len(&self) -> u64 {
        self.len
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        if pos >= self.len {
            return Err(Error::OutOfBounds { pos, len: self.len });
        }
        let rank = self.offset + pos;
        self.probe.touch(rank);
        Ok((self.bits)(rank))
    }
}

/// Pairs of the vertex block `offset+1 ..= offset+width`.
struct BlockOracle {
    src: Arc<GraphInstance>,
    offset: u32,
    len: u64,
    probe: Probe,
}

impl BitOracle for BlockOracle {
    fn len(&self) -> u64 {
        self.len
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        if pos >= self.len {
            return Err(Error::OutOfBounds { pos, len: self.len });
        }
        let (a, b) = edge_unrank(pos);
        let rank = pair_rank(a + self.offset, b + self.offset);
        self.probe.touch(rank);
        Ok(self.src.edge_by_rank(rank))
    }
}

/// Pairs among candidate vertices `first..=last` that have no edge to vertex 1.
struct NonNeighborOracle {
    src: Arc<GraphInstance>,
    first: u32,
    last: u32,
    len: u64,
    probe: Probe,
    meter: Option<Arc<WorkspaceMeter>>,
}

impl NonNeighborOracle {
    fn is_candidate(&self, v: u32) -> bool {
        let rank = pair_rank(1, v);
        self.probe.touch(rank);
        !self.src.edge_by_rank(rank)
    }

    /// The `target`-th (1-based) qualifying vertex, by counting.
    fn locate(&self, target: u32) -> Result<u32> {
        let meter = self.meter.as_deref();
        let _c = meter.map(|m| m.counter("clkpc.target", self.last.into())).transpose()?;
        let _v = meter.map(|m| m.counter("clkpc.scan", self.last.into())).transpose()?;
        let _n = meter.map(|m| m.counter("clkpc.count", self.last.into())).transpose()?;
        let mut count = 0;
        for v in self.first..=self.last {
            if self.is_candidate(v) {
                count += 1;
                if count == target {
                    return Ok(v);
                }
            }
        }
        Err(Error::InsufficientHarvest { needed: target.into(), found: count.into() })
    }

    fn available(&self) -> u32 {
        (self.first..=self.last).filter(|&v| !self.src.edge_by_rank(pair_rank(1, v))).count() as u32
    }
}

impl BitOracle for NonNeighborOracle {
    fn len(&self) -> u64 {
        self.len
    }

    fn bit(&self, pos: u64) -> Result<bool> {
        if pos >= self.len {
            return Err(Error::OutOfBounds { pos, len: self.len });
        }
        let (a, b) = edge_unrank(pos);
        let va = self.locate(a)?;
        let vb = self.locate(b)?;
        let rank = pair_rank(va, vb);
        self.probe.touch(rank);
        Ok(self.src.edge_by_rank(rank))
    }
}

enum EventRule {
    AllPlantedAtMost(u32),
    NonePlantedAbove(u32),
    Pseudo,
    EnoughVertices(Arc<NonNeighborOracle>, u32),
    LastVertexFree(u32),
}

/// A sub-instance plus a multiple-access tape harvested from the same source.
pub struct HarvestView {
    pub scheme: Scheme,
    pub params: SchemeParams,
    pub sub: SubGraph,
    pub rand: BitTape,
    pub budget: u64,
    pub budget_formula: String,
    /// The tape bits are not i.i.d. fair under a planted source.
    pub rand_is_pseudo: bool,
    pub warnings: Vec<String>,
    log: Option<Arc<AccessLog>>,
    event: EventRule,
}

impl HarvestView {
    pub fn access_log(&self) -> Option<&Arc<AccessLog>> {
        self.log.as_ref()
    }

    /// Whether the scheme's validity event holds. Needs the hidden planted
    /// set (`None` for a null source); `kpc-advanced` has no such event.
    pub fn event_ok(&self, planted: Option<&[u32]>) -> Option<bool> {
        let planted = planted.unwrap_or(&[]);
        match &self.event {
            EventRule::AllPlantedAtMost(bound) => Some(planted.iter().all(|&v| v <= *bound)),
            EventRule::NonePlantedAbove(bound) => Some(planted.iter().all(|&v| v <= *bound)),
            EventRule::Pseudo => None,
            EventRule::EnoughVertices(oracle, needed) => Some(oracle.available() >= *needed),
            EventRule::LastVertexFree(last) => Some(!planted.contains(last)),
        }
    }
}

fn probes(opts: &HarvestOptions) -> (Option<Arc<AccessLog>>, Probe, Probe) {
    let log = opts.trace.then(|| Arc::new(AccessLog::default()));
    (log.clone(), Probe { log: log.clone(), role: Role::Sub }, Probe { log, role: Role::Rand })
}

fn graph_bits(src: &Arc<GraphInstance>) -> Arc<dyn Fn(u64) -> bool + Send + Sync> {
    let g = src.clone();
    Arc::new(move |r| g.edge_by_rank(r))
}

fn check_shape(src: &GraphInstance, n: u32, ell: u32, k: u32) -> Result<()> {
    if src.n() != n {
        return Err(Error::param(format!("source has {} vertices, scheme expects {n}", src.n())));
    }
    let p = src.params();
    if p.variant.is_partite() && (p.ell != ell) {
        return Err(Error::param(format!("source block size {} differs from ell = {ell}", p.ell)));
    }
    if p.variant != GraphVariant::Er && p.k != k && k != 0 {
        return Err(Error::param(format!("source planted size {} differs from expected {k}", p.k)));
    }
    Ok(())
}

fn sub_variant(src: &GraphInstance) -> GraphVariant {
    src.params().variant
}

/// Sub = first `n-m` vertices; rand = edges touching the last `m` vertices.
pub fn harvest_pc_basic(src: Arc<GraphInstance>, k: u32, m: u32, opts: &HarvestOptions) -> Result<HarvestView> {
    let n = src.n();
    if m >= n {
        return Err(Error::param(format!("m = {m} must be smaller than n = {n}")));
    }
    if src.params().variant != GraphVariant::Er && src.params().k != k {
        return Err(Error::param(format!("source planted size {} differs from k = {k}", src.params().k)));
    }
    let params = SchemeParams::PcBasic { k, m };
    let (formula, budget) = params.budget(n, 0);
    let (log, sub_probe, rand_probe) = probes(opts);
    let offset = binom((n - m).into(), 2);
    let oracle = SuffixOracle { bits: graph_bits(&src), offset, len: budget, probe: rand_probe };
    let rand = BitTape::derived(Arc::new(oracle), budget, AccessPolicy::MultipleAccess)?;
    let shape = SubShape { n: n - m, k, ell: 0, variant: sub_variant(&src) };
    Ok(HarvestView {
        scheme: Scheme::PcBasic,
        params,
        sub: SubGraph { shape, source: SubSource::Prefix(src), probe: sub_probe },
        rand,
        budget,
        budget_formula: formula,
        rand_is_pseudo: false,
        warnings: Vec::new(),
        log,
        event: EventRule::AllPlantedAtMost(n - m),
    })
}

/// Sub = first `ell*k_s` vertices; rand = edges touching the last `m` vertices
/// of an `ell*k`-vertex source.
pub fn harvest_kpc_basic(
    src: Arc<GraphInstance>,
    ell: u32,
    k: u32,
    k_s: u32,
    m: u32,
    opts: &HarvestOptions,
) -> Result<HarvestView> {
    let n = ell * k;
    check_shape(&src, n, ell, k)?;
    if k_s + 1 > k {
        return Err(Error::param(format!("k_s = {k_s} must be at most k - 1 = {}", k.saturating_sub(1))));
    }
    if ell * k_s + m > n {
        return Err(Error::param(format!("sub vertices 1..={} overlap the last m = {m} vertices of {n}", ell * k_s)));
    }
    let params = SchemeParams::KpcBasic { ell, k, k_s, m };
    let (formula, budget) = params.budget(n, 0);
    let (log, sub_probe, rand_probe) = probes(opts);
    let offset = binom((n - m).into(), 2);
    let oracle = SuffixOracle { bits: graph_bits(&src), offset, len: budget, probe: rand_probe };
    let rand = BitTape::derived(Arc::new(oracle), budget, AccessPolicy::MultipleAccess)?;
    let shape = SubShape { n: ell * k_s, k: k_s, ell, variant: sub_variant(&src) };
    Ok(HarvestView {
        scheme: Scheme::KpcBasic,
        params,
        sub: SubGraph { shape, source: SubSource::Prefix(src), probe: sub_probe },
        rand,
        budget,
        budget_formula: formula,
        rand_is_pseudo: false,
        warnings: Vec::new(),
        log,
        event: EventRule::NonePlantedAbove(n - m),
    })
}

/// Source has `ell*2k` vertices. Sub = first `ell*k_s`; rand = every pair of
/// the last `ell*k` vertices.
pub fn harvest_kpc_advanced(
    src: Arc<GraphInstance>,
    ell: u32,
    k: u32,
    k_s: u32,
    opts: &HarvestOptions,
) -> Result<HarvestView> {
    let n = ell * 2 * k;
    check_shape(&src, n, ell, 2 * k)?;
    if k_s > k {
        return Err(Error::param(format!("k_s = {k_s} exceeds k = {k}")));
    }
    let mut warnings = Vec::new();
    // k_s <= k / sqrt(ell)  <=>  k_s^2 * ell <= k^2
    if u64::from(k_s).pow(2) * u64::from(ell) > u64::from(k).pow(2) {
        warnings.push(format!("k_s = {k_s} exceeds k/sqrt(ell) = {k}/sqrt({ell})"));
    }
    let params = SchemeParams::KpcAdvanced { ell, k, k_s };
    let (formula, budget) = params.budget(n, 0);
    let (log, sub_probe, rand_probe) = probes(opts);
    let oracle = BlockOracle { src: src.clone(), offset: ell * k, len: budget, probe: rand_probe };
    let rand = BitTape::derived(Arc::new(oracle), budget, AccessPolicy::MultipleAccess)?;
    let shape = SubShape { n: ell * k_s, k: k_s, ell, variant: sub_variant(&src) };
    Ok(HarvestView {
        scheme: Scheme::KpcAdvanced,
        params,
        sub: SubGraph { shape, source: SubSource::Prefix(src), probe: sub_probe },
        rand,
        budget,
        budget_formula: formula,
        rand_is_pseudo: true,
        warnings,
        log,
        event: EventRule::Pseudo,
    })
}

/// Source has `ell*4k` vertices. Sub = first `ell*k_s`; rand = pairs among the
/// last `ell*3k` vertices that are not adjacent to vertex 1.
pub fn harvest_clkpc(
    src: Arc<GraphInstance>,
    ell: u32,
    k: u32,
    k_s: u32,
    opts: &HarvestOptions,
) -> Result<HarvestView> {
    let n = ell * 4 * k;
    check_shape(&src, n, ell, 4 * k)?;
    if k_s > k {
        return Err(Error::param(format!("k_s = {k_s} exceeds k = {k}")));
    }
    let params = SchemeParams::Clkpc { ell, k, k_s };
    let (formula, budget) = params.budget(n, 0);
    let (log, sub_probe, rand_probe) = probes(opts);
    let oracle = Arc::new(NonNeighborOracle {
        src: src.clone(),
        first: ell * k + 1,
        last: n,
        len: budget,
        probe: rand_probe,
        meter: opts.meter.clone(),
    });
    let rand = BitTape::derived(oracle.clone(), budget, AccessPolicy::MultipleAccess)?;
    let shape = SubShape { n: ell * k_s, k: k_s, ell, variant: sub_variant(&src) };
    Ok(HarvestView {
        scheme: Scheme::Clkpc,
        params,
        sub: SubGraph { shape, source: SubSource::Prefix(src), probe: sub_probe },
        rand,
        budget,
        budget_formula: formula,
        rand_is_pseudo: false,
        warnings: Vec::new(),
        log,
        event: EventRule::EnoughVertices(oracle, ell * k),
    })
}

/// Source is an `s`-uniform hypergraph on `n+s-1` vertices with `k+s-2`
/// planted. Sub = the link graph of `{1..s-2}` on vertices `s-1..=n+s-2`;
/// rand = the hyperedges containing vertex `n+s-1`.
pub fn harvest_clhpc(src: Arc<HypergraphInstance>, k: u32, opts: &HarvestOptions) -> Result<HarvestView> {
    let s = src.s();
    let big_n = src.n();
    if big_n < s + 1 {
        return Err(Error::param(format!("need at least s+1 = {} vertices, got {big_n}", s + 1)));
    }
    let n = big_n - s + 1;
    let p = src.params();
    if p.variant != HypergraphVariant::Her && p.k != k + s - 2 {
        return Err(Error::param(format!("source planted size {} differs from k+s-2 = {}", p.k, k + s - 2)));
    }
    let params = SchemeParams::Clhpc { k };
    let (formula, budget) = params.budget(big_n, s);
    let (log, sub_probe, rand_probe) = probes(opts);
    let offset = binom((big_n - 1).into(), s.into());
    let h = src.clone();
    let oracle =
        SuffixOracle { bits: Arc::new(move |r| h.hyperedges().get(r)), offset, len: budget, probe: rand_probe };
    let rand = BitTape::derived(Arc::new(oracle), budget, AccessPolicy::MultipleAccess)?;
    let variant = match p.variant {
        HypergraphVariant::Her => GraphVariant::Er,
        _ => GraphVariant::Pc,
    };
    let shape = SubShape { n, k, ell: 0, variant };
    Ok(HarvestView {
        scheme: Scheme::Clhpc,
        params,
        sub: SubGraph { shape, source: SubSource::Link(src), probe: sub_probe },
        rand,
        budget,
        budget_formula: formula,
        rand_is_pseudo: false,
        warnings: Vec::new(),
        log,
        event: EventRule::LastVertexFree(big_n),
    })
}

/// Convenience wrapper for graph sources.
pub fn harvest_graph(src: Arc<GraphInstance>, params: SchemeParams, opts: &HarvestOptions) -> Result<HarvestView> {
    match params {
        SchemeParams::PcBasic { k, m } => harvest_pc_basic(src, k, m, opts),
        SchemeParams::KpcBasic { ell, k, k_s, m } => harvest_kpc_basic(src, ell, k, k_s, m, opts),
        SchemeParams::KpcAdvanced { ell, k, k_s } => harvest_kpc_advanced(src, ell, k, k_s, opts),
        SchemeParams::Clkpc { ell, k, k_s } => harvest_clkpc(src, ell, k, k_s, opts),
        SchemeParams::Clhpc { .. } => Err(Error::StageIncompatible("clhpc needs a hypergraph source".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_graph, sample_hypergraph, GraphParams, HypergraphOracle, HypergraphParams};
    use crate::tape::BitStream;

    fn er(n: u32, seed: u64) -> Arc<GraphInstance> {
        Arc::new(sample_graph(&GraphParams::er(n), &mut BitStream::new(seed)).unwrap().instance)
    }

    #[test]
    fn pc_basic_budget_and_bits() {
        let g = er(5, 1);
        let v = harvest_pc_basic(g.clone(), 2, 2, &HarvestOptions::default()).unwrap();
        assert_eq!(v.budget, 7);
        assert_eq!(v.rand.len(), 7);
        // rand bit p is the p-th edge touching {4, 5} in colex order
        let touching: Vec<bool> =
            (4..=5u32).flat_map(|j| (1..j).map(move |i| (i, j))).map(|(i, j)| g.edge(i, j).unwrap()).collect();
        let rand: Vec<bool> = (0..7).map(|p| v.rand.read(p).unwrap()).collect();
        assert_eq!(rand, touching);
        assert!(v.rand.read(7).is_err());
        assert_eq!(v.sub.vertex_count(), 3);
        assert_eq!(v.sub.edge(1, 3).unwrap(), g.edge(1, 3).unwrap());
        assert!(v.sub.edge(1, 4).is_err());
        assert!(harvest_pc_basic(g, 2, 5, &HarvestOptions::default()).is_err());
    }

    #[test]
    fn kpc_budgets_and_errors() {
        let g = er(9, 2);
        let v = harvest_kpc_basic(g.clone(), 3, 3, 2, 2, &HarvestOptions::default()).unwrap();
        assert_eq!(v.budget, 15);
        assert!(harvest_kpc_basic(g.clone(), 3, 3, 2, 4, &HarvestOptions::default()).is_err());
        assert!(harvest_kpc_basic(g, 3, 3, 3, 0, &HarvestOptions::default()).is_err());

        let g = er(8, 3);
        let v = harvest_kpc_advanced(g.clone(), 2, 2, 1, &HarvestOptions::default()).unwrap();
        assert_eq!(v.budget, 6);
        assert!(v.rand_is_pseudo);
        assert_eq!(v.event_ok(None), None);
        // rand bit 0 is the edge (5, 6)
        assert_eq!(v.rand.read(0).unwrap(), g.edge(5, 6).unwrap());
        assert!(harvest_kpc_advanced(g.clone(), 2, 2, 3, &HarvestOptions::default()).is_err());
        let v = harvest_kpc_advanced(g, 2, 2, 2, &HarvestOptions::default()).unwrap();
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn clkpc_locates_non_neighbours() {
        let g = sample_graph(&GraphParams::clkpc(4, 8), &mut BitStream::new(5)).unwrap();
        let src = Arc::new(g.instance);
        let v = harvest_clkpc(src.clone(), 4, 2, 2, &HarvestOptions { trace: true, meter: None }).unwrap();
        assert_eq!(v.budget, binom(8, 2));
        let candidates: Vec<u32> = (9..=32).filter(|&u| !src.edge(1, u).unwrap()).collect();
        let planted = g.planted.unwrap();
        assert!(candidates.iter().all(|c| !planted.contains(c)));
        let ok = v.event_ok(Some(&planted)).unwrap();
        assert_eq!(ok, candidates.len() >= 8);
        if ok {
            for p in 0..v.budget {
                let (a, b) = edge_unrank(p);
                let expect = src.edge(candidates[a as usize - 1], candidates[b as usize - 1]).unwrap();
                assert_eq!(v.rand.read(p).unwrap(), expect);
            }
        }
        for i in 1..=8 {
            for j in i + 1..=8 {
                v.sub.edge(i, j).unwrap();
            }
        }
        assert!(v.access_log().unwrap().is_disjoint());
    }

    #[test]
    fn clkpc_insufficient_vertices() {
        // complete graph: vertex 1 is adjacent to everyone
        let n = 8u32;
        let mut bits = crate::bits::PackedBits::zeros(binom(n.into(), 2));
        for r in 0..bits.len() {
            bits.set(r, true);
        }
        let g = Arc::new(GraphInstance::new(GraphParams::er(n), bits).unwrap());
        let v = harvest_clkpc(g, 2, 1, 1, &HarvestOptions::default()).unwrap();
        assert_eq!(v.event_ok(None), Some(false));
        assert!(matches!(v.rand.read(0), Err(Error::InsufficientHarvest { .. })));
    }

    #[test]
    fn clhpc_link_graph() {
        let p = HypergraphParams { variant: HypergraphVariant::Her, n: 6, s: 3, k: 0 };
        let h = Arc::new(sample_hypergraph(&p, &mut BitStream::new(9)).unwrap().instance);
        let v = harvest_clhpc(h.clone(), 2, &HarvestOptions::default()).unwrap();
        assert_eq!(v.budget, 10);
        assert_eq!(v.sub.vertex_count(), 4);
        assert_eq!(v.sub.edge(1, 2).unwrap(), h.hyperedge(&[1, 2, 3]).unwrap());
        assert_eq!(v.sub.edge(3, 4).unwrap(), h.hyperedge(&[1, 4, 5]).unwrap());
        assert_eq!(v.rand.read(0).unwrap(), h.hyperedge(&[1, 2, 6]).unwrap());
        assert_eq!(v.rand.read(9).unwrap(), h.hyperedge(&[4, 5, 6]).unwrap());
        assert_eq!(v.event_ok(Some(&[1, 2, 6])), Some(false));
        assert_eq!(v.event_ok(Some(&[1, 2, 5])), Some(true));
    }
}
