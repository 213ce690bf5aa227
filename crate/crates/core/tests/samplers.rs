//! Edge marginals of the samplers against closed forms.

use num_traits::ToPrimitive;
use pcspace::bits::{edge_unrank, subset_unrank, PackedBits};
use pcspace::graph::{
    marginal, sample_graph, sample_hypergraph, DistributionSpec, GraphParams, HypergraphParams, HypergraphVariant,
};
use pcspace::oracle::stats::marginal_test;
use pcspace::tape::BitStream;

const ALPHA: f64 = 0.001;
const SAMPLES: usize = 4000;

/// `P(pair present)` for each graph family, written out by hand.
fn pair_prob(p: &GraphParams, i: u32, j: u32) -> f64 {
    let (n, k, ell) = (f64::from(p.n), f64::from(p.k), f64::from(p.ell));
    let block = |v: u32| (v - 1) / p.ell;
    let both = match p.variant {
        pcspace::graph::GraphVariant::Er => 0.0,
        pcspace::graph::GraphVariant::Pc => k * (k - 1.0) / (n * (n - 1.0)),
        pcspace::graph::GraphVariant::Kpc if block(i) == block(j) => 0.0,
        pcspace::graph::GraphVariant::Kpc => 1.0 / (ell * ell),
        pcspace::graph::GraphVariant::Clkpc if block(i) == block(j) => 0.0,
        pcspace::graph::GraphVariant::Clkpc if i.min(j) == 1 => 1.0 / ell,
        pcspace::graph::GraphVariant::Clkpc if block(i) == 0 || block(j) == 0 => 0.0,
        pcspace::graph::GraphVariant::Clkpc => 1.0 / (ell * ell),
    };
    both + (1.0 - both) / 2.0
}

fn check_graph(p: GraphParams, seed: u64) {
    let mut rng = BitStream::new(seed);
    let samples: Vec<PackedBits> =
        (0..SAMPLES).map(|_| sample_graph(&p, &mut rng).unwrap().instance.edges().clone()).collect();
    let len = samples[0].len();
    let probs: Vec<f64> = (0..len)
        .map(|r| {
            let (i, j) = edge_unrank(r);
            let want = pair_prob(&p, i, j);
            let lib = marginal(&DistributionSpec::Graph(p), &[i, j]).unwrap().to_f64().unwrap();
            assert!((want - lib).abs() < 1e-12, "{p:?} pair ({i}, {j}): {want} vs {lib}");
            want
        })
        .collect();
    let t = marginal_test("edges", &samples, &probs, ALPHA).unwrap();
    assert!(t.pass, "{p:?}: {t:?}");
}

#[test]
fn graph_marginals() {
    check_graph(GraphParams::er(9), 1);
    check_graph(GraphParams::pc(9, 4), 2);
    check_graph(GraphParams::kpc(3, 3), 3);
    check_graph(GraphParams::clkpc(3, 4), 4);
}

fn choose(n: f64, k: f64) -> f64 {
    (0..k as u32).fold(1.0, |acc, i| acc * (n - f64::from(i)) / (f64::from(i) + 1.0))
}

#[test]
fn hypergraph_marginals() {
    for (variant, k) in [(HypergraphVariant::Her, 0), (HypergraphVariant::Hpc, 4), (HypergraphVariant::Clhpc, 4)] {
        let p = HypergraphParams { variant, n: 7, s: 3, k };
        let mut rng = BitStream::new(11);
        let samples: Vec<PackedBits> =
            (0..SAMPLES).map(|_| sample_hypergraph(&p, &mut rng).unwrap().instance.hyperedges().clone()).collect();
        let probs: Vec<f64> = (0..samples[0].len())
            .map(|r| {
                let e = subset_unrank(r, 3);
                let lib = marginal(&DistributionSpec::Hypergraph(p), &e).unwrap().to_f64().unwrap();
                let (n, kk) = (7.0, f64::from(k));
                // the leaked variant fixes vertex 1 in the planted set
                let both = match variant {
                    HypergraphVariant::Her => 0.0,
                    HypergraphVariant::Hpc => choose(n - 3.0, kk - 3.0) / choose(n, kk),
                    HypergraphVariant::Clhpc => {
                        let fixed = e.iter().filter(|&&v| v == 1).count() as f64;
                        choose(n - 1.0 - (3.0 - fixed), kk - 1.0 - (3.0 - fixed)) / choose(n - 1.0, kk - 1.0)
                    }
                };
                let want = both + (1.0 - both) / 2.0;
                assert!((want - lib).abs() < 1e-12, "{variant:?} {e:?}: {want} vs {lib}");
                want
            })
            .collect();
        let t = marginal_test("hyperedges", &samples, &probs, ALPHA).unwrap();
        assert!(t.pass, "{variant:?}: {t:?}");
    }
}
