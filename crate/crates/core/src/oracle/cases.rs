//! Named exact checks built on [`enumerate_sampler`].
//!
//! Harvest checks enumerate only the source bits a scheme can read. Every
//! other free bit is pinned to 0, which leaves the joint law of what the
//! scheme sees unchanged. Each path re-checks this with the harvest access log.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::enumerate::{enumerate_sampler, tv_distance, uniform_bits, ExactDistribution, DEFAULT_LEAF_LIMIT};
use crate::bits::{binom, PackedBits};
use crate::error::{Error, Result};
use crate::graph::{
    next_colex, sample_graph, sample_hypergraph_planted, sample_planted, GraphInstance, GraphOracle, GraphParams,
    HypergraphInstance, HypergraphParams, HypergraphVariant, Labeled,
};
use crate::harvest::{harvest_clhpc, harvest_clkpc, harvest_pc_basic, HarvestOptions, HarvestView};
use crate::permute::{relabel, ExplicitPerm, PermFn};
use crate::reduce::rational_string;
use crate::tape::RandomSource;

/// Result of one exact comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCheck {
    pub name: String,
    pub tv: BigRational,
    /// Probability that the scheme's validity event fails, where one exists.
    pub event_failure: Option<BigRational>,
    pub outcomes: usize,
}

impl ExactCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "tv": rational_string(&self.tv),
            "event_failure": self.event_failure.as_ref().map(rational_string),
            "outcomes": self.outcomes,
            "pass": self.tv.is_zero(),
        })
    }
}

/// Like [`sample_graph`], but free pairs rejected by `keep` are 0 and draw nothing.
pub fn sample_graph_pinned(
    params: &GraphParams,
    rng: &mut dyn RandomSource,
    keep: &dyn Fn(u32, u32) -> bool,
) -> Result<Labeled<GraphInstance>> {
    let planted = sample_planted(params, rng)?;
    let n = params.n;
    let mut member = vec![false; n as usize + 1];
    for &v in planted.iter().flatten() {
        member[v as usize] = true;
    }
    let mut edges = PackedBits::zeros(binom(n.into(), 2));
    let mut rank = 0;
    for j in 2..=n {
        for i in 1..j {
            let forced = member[i as usize] && member[j as usize];
            edges.set(rank, forced || (keep(i, j) && rng.bit()));
            rank += 1;
        }
    }
    Ok(Labeled { instance: GraphInstance::new(*params, edges)?, planted })
}

/// Hypergraph counterpart of [`sample_graph_pinned`].
pub fn sample_hypergraph_pinned(
    params: &HypergraphParams,
    rng: &mut dyn RandomSource,
    keep: &dyn Fn(&[u32]) -> bool,
) -> Result<Labeled<HypergraphInstance>> {
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
        bits.set(rank, forced || (keep(&subset) && rng.bit()));
        next_colex(&mut subset, n);
    }
    Ok(Labeled { instance: HypergraphInstance::new(*params, bits)?, planted })
}

/// All edges of a graph oracle in rank order.
pub fn graph_bits(g: &dyn GraphOracle) -> Result<PackedBits> {
    let n = g.vertex_count();
    let mut out = PackedBits::zeros(binom(n.into(), 2));
    let mut r = 0;
    for j in 2..=n {
        for i in 1..j {
            out.set(r, g.edge(i, j)?);
            r += 1;
        }
    }
    Ok(out)
}

fn graph_dist(params: &GraphParams) -> Result<ExactDistribution<PackedBits>> {
    enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| Ok(sample_graph(params, rng)?.instance.edges().clone()))
}

/// `((sub, rand), event_ok)` read from a traced view; errors if the view
/// touched a pinned rank.
fn view_outcome(
    v: &HarvestView,
    planted: Option<&[u32]>,
    kept: &dyn Fn(u64) -> bool,
) -> Result<((PackedBits, PackedBits), bool)> {
    let sub = graph_bits(&v.sub)?;
    let mut rand = PackedBits::zeros(v.budget);
    let event = v.event_ok(planted).unwrap_or(true);
    if event {
        for p in 0..v.budget {
            rand.set(p, v.rand.read(p)?);
        }
    }
    if let Some(log) = v.access_log() {
        if let Some(r) = log.sub_ranks().union(&log.rand_ranks()).find(|&&r| !kept(r)) {
            return Err(Error::param(format!("harvest read pinned source rank {r}")));
        }
    }
    Ok(((sub, rand), event))
}

fn conditional_check(
    name: &str,
    joint: ExactDistribution<((PackedBits, PackedBits), bool)>,
    target: &ExactDistribution<PackedBits>,
    budget: u64,
) -> Result<ExactCheck> {
    let (cond, p_ok) = joint.condition(|o| o.1)?;
    let got = cond.map(|o| o.0.clone());
    let want = target.product(&uniform_bits(budget)?);
    Ok(ExactCheck {
        name: name.into(),
        tv: tv_distance(&got, &want)?,
        event_failure: Some(BigRational::one() - p_ok),
        outcomes: got.len(),
    })
}

/// Induced subgraph on the first `ell·k_s` vertices of `kG(ell·k)` against
/// `kG(ell·k_s)`.
pub fn self_reducibility(ell: u32, k: u32, k_s: u32) -> Result<ExactCheck> {
    if k_s > k {
        return Err(Error::param("k_s exceeds k"));
    }
    let src = GraphParams::kpc(ell, k);
    let prefix = binom(u64::from(ell * k_s), 2);
    let got = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let g = sample_graph(&src, rng)?;
        let e = g.instance.edges();
        Ok(PackedBits::from_bools(&(0..prefix).map(|r| e.get(r)).collect::<Vec<_>>()))
    })?;
    let want = graph_dist(&GraphParams::kpc(ell, k_s))?;
    Ok(ExactCheck {
        name: "self-reducibility".into(),
        tv: tv_distance(&got, &want)?,
        event_failure: None,
        outcomes: got.len(),
    })
}

/// pc-basic on `PC(n, k)` with the last `m` vertices harvested.
pub fn harvest_pc_basic_exact(n: u32, m: u32, k: u32) -> Result<ExactCheck> {
    let src = GraphParams::pc(n, k);
    let joint = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let g = sample_graph(&src, rng)?;
        let opts = HarvestOptions { trace: true, meter: None };
        let v = harvest_pc_basic(Arc::new(g.instance), k, m, &opts)?;
        view_outcome(&v, g.planted.as_deref(), &|_| true)
    })?;
    let budget = binom(n.into(), 2) - binom((n - m).into(), 2);
    conditional_check("harvest pc-basic", joint, &graph_dist(&GraphParams::pc(n - m, k))?, budget)
}

/// clkpc on `CLKPC(ell, 4k)`; pairs touching vertices outside the sub and
/// candidate range (other than through vertex 1) are pinned.
pub fn harvest_clkpc_exact(ell: u32, k: u32, k_s: u32) -> Result<ExactCheck> {
    let src = GraphParams::clkpc(ell, 4 * k);
    let sub_n = ell * k_s;
    let first = ell * k + 1;
    let keep = move |i: u32, j: u32| (j <= sub_n) || (i == 1 && j >= first) || (i >= first);
    let kept_rank = move |r: u64| {
        let (i, j) = crate::bits::edge_unrank(r);
        keep(i, j)
    };
    let joint = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let g = sample_graph_pinned(&src, rng, &keep)?;
        let opts = HarvestOptions { trace: true, meter: None };
        let v = harvest_clkpc(Arc::new(g.instance), ell, k, k_s, &opts)?;
        view_outcome(&v, g.planted.as_deref(), &kept_rank)
    })?;
    let budget = binom(u64::from(ell * k), 2);
    conditional_check("harvest clkpc", joint, &graph_dist(&GraphParams::clkpc(ell, k_s))?, budget)
}

/// clhpc on `CLHPC(n+s−1, s, k+s−2)`; hyperedges containing neither the
/// leaked tuple nor the last vertex are pinned.
pub fn harvest_clhpc_exact(s: u32, n: u32, k: u32) -> Result<ExactCheck> {
    let big_n = n + s - 1;
    let src = HypergraphParams { variant: HypergraphVariant::Clhpc, n: big_n, s, k: k + s - 2 };
    let leak: Vec<u32> = (1..=s - 2).collect();
    let keep = |e: &[u32]| e.starts_with(&leak) || e.last() == Some(&big_n);
    let kept_rank = |r: u64| keep(&crate::bits::subset_unrank(r, s as usize));
    let joint = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let h = sample_hypergraph_pinned(&src, rng, &keep)?;
        let opts = HarvestOptions { trace: true, meter: None };
        let v = harvest_clhpc(Arc::new(h.instance), k, &opts)?;
        view_outcome(&v, h.planted.as_deref(), &kept_rank)
    })?;
    let budget = binom(u64::from(n + s - 2), u64::from(s - 1));
    conditional_check("harvest clhpc", joint, &graph_dist(&GraphParams::pc(n, k))?, budget)
}

/// Fisher–Yates with exact `below` draws: a uniform permutation of `1..=n`.
pub fn uniform_permutation(n: u32, rng: &mut dyn RandomSource) -> Vec<u32> {
    let mut p: Vec<u32> = (1..=n).collect();
    for i in (1..n as usize).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        p.swap(i, j);
    }
    p
}

/// `kG(ell·k)` relabelled by an exactly uniform permutation against `PC(ell·k, k)`.
pub fn relabel_exact(ell: u32, k: u32) -> Result<ExactCheck> {
    let src = GraphParams::kpc(ell, k);
    let n = ell * k;
    let got = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let g = sample_graph(&src, rng)?;
        let perm = ExplicitPerm::new(uniform_permutation(n, rng))?;
        graph_bits(&relabel(&g.instance, perm)?)
    })?;
    let want = graph_dist(&GraphParams::pc(n, k))?;
    Ok(ExactCheck { name: "relabel".into(), tv: tv_distance(&got, &want)?, event_failure: None, outcomes: got.len() })
}

/// Permutations from all `2^r` strings: TV of the covered-conditional law
/// from uniform, and the exact non-coverage probability.
pub fn permutation_exact(n: u32, r: u64) -> Result<ExactCheck> {
    if r > 24 {
        return Err(Error::BudgetTooLarge { leaves: 1u128 << r.min(127), limit: DEFAULT_LEAF_LIMIT.into() });
    }
    let joint = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| {
        let bits: Vec<bool> = (0..r).map(|_| rng.bit()).collect();
        let p = PermFn::from_bits(n, PackedBits::from_bools(&bits))?;
        Ok((p.images(), p.covered()))
    })?;
    let (cond, p_cov) = joint.condition(|o| o.1)?;
    let got = cond.map(|o| o.0.clone());
    let want = enumerate_sampler(DEFAULT_LEAF_LIMIT, |rng| Ok(uniform_permutation(n, rng)))?;
    Ok(ExactCheck {
        name: "permutation".into(),
        tv: tv_distance(&got, &want)?,
        event_failure: Some(BigRational::one() - p_cov),
        outcomes: got.len(),
    })
}
