//! Workspace audit: runs each metered operation on a source of about
//! `input_bits` bits and compares the metered peak with `c·⌈log₂ N⌉`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::binom;
use crate::error::Result;
use crate::fixed::five_point_pair;
use crate::graph::{sample_graph, sample_hypergraph, GraphParams, HypergraphParams, HypergraphVariant};
use crate::harvest::{harvest_clkpc, harvest_pc_basic, HarvestOptions};
use crate::permute::{build_pi, default_perm_bits, pi_eval};
use crate::reduce::detect::{detect_via_recovery_hpc, detect_via_recovery_kpc, LeakageCheatingOracle, ZeroOracle};
use crate::reduce::kwise::{kwise_reduce, KwiseParams};
use crate::reduce::spca::{spca_derive_params, spca_reduce};
use crate::reduce::submat::{submat_reduce, SubmatParams};
use crate::reduce::Frac;
use crate::tape::{BitStream, WorkspaceMeter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub name: String,
    pub input_bits: u64,
    pub limit: u64,
    pub peak: u64,
    pub violations: Vec<String>,
    pub pass: bool,
}

fn entry(name: &str, m: &WorkspaceMeter, input_bits: u64) -> AuditEntry {
    let r = m.report();
    AuditEntry {
        name: name.into(),
        input_bits,
        limit: r.limit,
        peak: r.peak,
        pass: r.violations.is_empty() && r.peak <= r.limit,
        violations: r.violations,
    }
}

/// Largest `n` with `C(n, 2) ≤ bits`.
fn graph_n_for(bits: u64) -> u32 {
    let mut n = 2u32;
    while binom(u64::from(n) + 1, 2) <= bits {
        n += 1;
    }
    n
}

/// Runs the audit. With `strict`, the first violation aborts with an error.
pub fn workspace_audit(input_bits: u64, constant: u64, strict: bool, seed: u64) -> Result<Vec<AuditEntry>> {
    let mut out = Vec::new();
    let mut rng = BitStream::new(seed);
    let meter = |bits: u64| WorkspaceMeter::for_input(bits, constant, strict);
    let n = graph_n_for(input_bits);
    let big = binom(n.into(), 2);

    // permutation evaluation
    {
        let r = default_perm_bits(n);
        let p = build_pi(n, &rng.tape(r), r)?;
        let m = meter(big);
        for i in (1..=n).step_by((n as usize / 64).max(1)) {
            pi_eval(&p, i, Some(&m))?;
        }
        out.push(entry("pi_eval", &m, big));
    }

    // clkpc non-neighbour location scans
    {
        let ell = 4;
        let k = n / 16;
        let src = Arc::new(sample_graph(&GraphParams::clkpc(ell, 4 * k), &mut rng)?.instance);
        let bits = src.edges().len();
        let m = Arc::new(meter(bits));
        let opts = HarvestOptions { trace: false, meter: Some(m.clone()) };
        let v = harvest_clkpc(src, ell, k, 2, &opts)?;
        let step = (v.budget / 97).max(1);
        let mut pos = 0;
        while pos < v.budget {
            v.rand.read(pos)?;
            pos += step;
        }
        out.push(entry("harvest clkpc scan", &m, bits));

        // submat entries on the same view
        let p = SubmatParams::derive(u64::from(ell), 2, 2, 1, &num_rational::BigRational::new(1.into(), 100.into()))?;
        let (q0, q1) = five_point_pair(p.w_bar, p.t_cap)?;
        let m = meter(bits);
        let inst = submat_reduce(v.sub.clone(), &p, v.rand, q0, q1)?;
        for i in 1..=p.p_bar {
            for j in 1..=p.p_bar {
                inst.entry_metered(i, j, Some(&m))?;
            }
        }
        out.push(entry("submat entries", &m, bits));
    }

    // SPCA and k-wise entries on pc-basic views of an ER source
    {
        let src = Arc::new(sample_graph(&GraphParams::er(n), &mut rng)?.instance);
        let nn = u64::from(n);
        let p = spca_derive_params(nn, nn - 40, 22, Frac { num: 1, den: 3 }, Frac { num: 1, den: 10 }, 64)?;
        let v = harvest_pc_basic(src.clone(), 0, n - 40, &HarvestOptions::default())?;
        let rand = if v.budget >= p.rand_len() { v.rand } else { rng.tape(p.rand_len()) };
        let inst = spca_reduce(v.sub, &p, rand)?;
        let m = meter(big);
        for i in 1..=p.d_bar {
            for j in 1..=p.n_bar {
                inst.entry_metered(i, j, Some(&m))?;
            }
        }
        out.push(entry("spca entries", &m, big));

        let kp = KwiseParams::derive(Frac { num: 1, den: 1 }, 4, 10, 64)?;
        let v = harvest_pc_basic(src, 0, n - 16, &HarvestOptions::default())?;
        let inst = kwise_reduce(v.sub, kp.layout(), v.rand)?;
        let m = meter(big);
        for t in 1..=kp.s_bar {
            for c in 1..=kp.n_bar {
                inst.bit_metered(t, c, Some(&m))?;
            }
        }
        out.push(entry("kwise entries", &m, big));
    }

    // recovery-to-detection counters
    {
        let hp = HypergraphParams { variant: HypergraphVariant::Hpc, n: 30, s: 3, k: 8 };
        let h = sample_hypergraph(&hp, &mut rng)?;
        let bits = h.instance.hyperedges().len();
        let m = meter(bits);
        detect_via_recovery_hpc(&h.instance, 8, &LeakageCheatingOracle::new(h.planted.as_deref()), Some(&m))?;
        detect_via_recovery_hpc(&h.instance, 8, &ZeroOracle, Some(&m))?;
        out.push(entry("detect hpc", &m, bits));

        let g = sample_graph(&GraphParams::clkpc(15, 8), &mut rng)?;
        let bits = g.instance.edges().len();
        let m = meter(bits);
        detect_via_recovery_kpc(&g.instance, 15, 8, &LeakageCheatingOracle::new(g.planted.as_deref()), Some(&m))?;
        detect_via_recovery_kpc(&g.instance, 15, 8, &ZeroOracle, Some(&m))?;
        out.push(entry("detect kpc", &m, bits));
    }
    Ok(out)
}
