//! End-to-end runs: generate, harvest, reduce, with every artifact written
//! to one directory.
//!
//! Files: `instance.pcg` or `instance.hpg`, `sub.pcg` after a harvest,
//! `reduced.red`, `manifest.json`. Labels and event flags go only to
//! `instance.secret.json` and `secret.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bits::PackedBits;
use crate::error::{Error, Result};
use crate::fixed::{five_point_pair, DiscretePmf, PmfEntry};
use crate::format::{encode_graph, encode_hypergraph, encode_reduced, Encoding, ReducedHeader, Sidecar};
use crate::graph::{
    sample_graph, sample_hypergraph, GraphInstance, GraphOracle, GraphParams, HypergraphInstance, HypergraphParams,
};
use crate::harvest::{harvest_clhpc, harvest_graph, HarvestOptions, HarvestView, SchemeParams, SubGraph};
use crate::reduce::kwise::{kwise_reduce, KwiseParams};
use crate::reduce::spca::{spca_derive_params, spca_reduce};
use crate::reduce::submat::{submat_reduce, SubmatParams};
use crate::reduce::Frac;
use crate::tape::{AccessPolicy, BitStream, BitTape, WorkspaceMeter, STREAM_GENERATOR_ID};

/// Default workspace constant `c` in `c·⌈log₂ N⌉`.
pub const DEFAULT_WORKSPACE_CONSTANT: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum StageSpec {
    Gen {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graph: Option<GraphParams>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hypergraph: Option<HypergraphParams>,
    },
    Harvest {
        #[serde(flatten)]
        scheme: SchemeParams,
    },
    Reduce {
        #[serde(flatten)]
        target: ReduceTarget,
        #[serde(default)]
        rand: RandSpec,
    },
}

/// Where a reduction gets its random bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandSpec {
    /// The tape of the preceding harvest stage.
    #[default]
    Harvested,
    /// A fresh stream with this seed.
    Seed(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum ReduceTarget {
    Spca {
        n: u64,
        m: u64,
        k: u64,
        mu: Frac,
        delta: Frac,
        d_bar: u64,
        /// Fail when the admissible-region inequalities do not hold.
        #[serde(default)]
        require_region: bool,
    },
    Submat {
        ell: u64,
        k_s: u64,
        p_bar: u64,
        k_bar: u64,
        /// `λ` as "num/den".
        lambda: String,
        /// Defaults to the five-point test pair.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q0: Option<Vec<PmfEntry>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q1: Option<Vec<PmfEntry>>,
    },
    Kwise {
        alpha: Frac,
        ell_exp: u32,
        k: u64,
        s_bar: u64,
    },
}

impl ReduceTarget {
    pub fn name(&self) -> &'static str {
        match self {
            ReduceTarget::Spca { .. } => "spca",
            ReduceTarget::Submat { .. } => "submat",
            ReduceTarget::Kwise { .. } => "kwise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub strict_workspace: bool,
    #[serde(default = "default_constant")]
    pub workspace_constant: u64,
    pub out_dir: PathBuf,
    pub stages: Vec<StageSpec>,
}

fn default_constant() -> u64 {
    DEFAULT_WORKSPACE_CONSTANT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub generator: String,
    pub strict_workspace: bool,
    pub stages: Vec<StageRecord>,
    pub workspace: crate::tape::MeterReport,
    pub files: Vec<String>,
}

/// Label-dependent results, kept apart from the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecretRecord {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_ok: Option<bool>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let num: BigInt = a.trim().parse().map_err(|_| Error::param(format!("bad rational {s:?}")))?;
    let den: BigInt = b.trim().parse().map_err(|_| Error::param(format!("bad rational {s:?}")))?;
    if den == BigInt::from(0) {
        return Err(Error::param(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

/// Checks stage order and kinds before anything runs.
pub fn check_config(cfg: &PipelineConfig) -> Result<()> {
    let bad = |m: String| Err(Error::StageIncompatible(m));
    let Some(StageSpec::Gen { graph, hypergraph }) = cfg.stages.first() else {
        return bad("the first stage must be gen".into());
    };
    let hyper = match (graph, hypergraph) {
        (Some(g), None) => {
            g.validate()?;
            false
        }
        (None, Some(h)) => {
            h.validate()?;
            true
        }
        _ => return bad("gen needs exactly one of graph or hypergraph".into()),
    };
    let mut harvested = false;
    let mut reduced = false;
    for (i, st) in cfg.stages.iter().enumerate().skip(1) {
        match st {
            StageSpec::Gen { .. } => return bad(format!("stage {i}: only one gen stage is supported")),
            StageSpec::Harvest { scheme } => {
                if harvested || reduced {
                    return bad(format!("stage {i}: harvest must come once, before reduce"));
                }
                let is_h = matches!(scheme, SchemeParams::Clhpc { .. });
                if is_h != hyper {
                    return bad(format!(
                        "stage {i}: scheme {} does not accept a {} source",
                        scheme.scheme().name(),
                        if hyper { "hypergraph" } else { "graph" }
                    ));
                }
                harvested = true;
            }
            StageSpec::Reduce { rand, .. } => {
                if reduced {
                    return bad(format!("stage {i}: only one reduce stage is supported"));
                }
                if *rand == RandSpec::Harvested && !harvested {
                    return bad(format!("stage {i}: harvested randomness requested without a harvest stage"));
                }
                if !harvested && hyper {
                    return bad(format!("stage {i}: reductions need a graph; harvest clhpc first"));
                }
                reduced = true;
            }
        }
    }
    Ok(())
}

enum Source {
    Graph(Arc<GraphInstance>, Option<Vec<u32>>),
    Hyper(Arc<HypergraphInstance>, Option<Vec<u32>>),
}

/// Materialises a sub-instance as an explicit graph.
fn materialize(sub: &SubGraph) -> Result<GraphInstance> {
    let sh = sub.shape();
    let n = sh.n;
    let mut bits = PackedBits::zeros(crate::bits::binom(n.into(), 2));
    let mut r = 0;
    for j in 2..=n {
        for i in 1..j {
            bits.set(r, sub.edge(i, j)?);
            r += 1;
        }
    }
    let k = if sh.variant == crate::graph::GraphVariant::Er { 0 } else { sh.k };
    GraphInstance::new(GraphParams { variant: sh.variant, n, k, ell: sh.ell }, bits)
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<String>) -> Result<()> {
    fs::write(dir.join(name), bytes)?;
    files.push(name.to_string());
    Ok(())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// Runs every stage and writes the artifacts. The same config always gives
/// byte-identical files.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    check_config(cfg)?;
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut records = Vec::new();
    let mut stream = BitStream::new(cfg.seed);

    let source = match &cfg.stages[0] {
        StageSpec::Gen { graph: Some(p), .. } => {
            let g = sample_graph(p, &mut stream)?;
            write(dir, "instance.pcg", &encode_graph(&g.instance), &mut files)?;
            write(
                dir,
                "instance.secret.json",
                &json_bytes(&Sidecar::for_graph(&g, cfg.seed, STREAM_GENERATOR_ID))?,
                &mut files,
            )?;
            records.push(StageRecord {
                stage: "gen".into(),
                detail: serde_json::json!({ "params": p, "bits": g.instance.edges().len(), "file": "instance.pcg" }),
            });
            Source::Graph(Arc::new(g.instance), g.planted)
        }
        StageSpec::Gen { hypergraph: Some(p), .. } => {
            let h = sample_hypergraph(p, &mut stream)?;
            write(dir, "instance.hpg", &encode_hypergraph(&h.instance), &mut files)?;
            write(
                dir,
                "instance.secret.json",
                &json_bytes(&Sidecar::for_hypergraph(&h, cfg.seed, STREAM_GENERATOR_ID))?,
                &mut files,
            )?;
            records.push(StageRecord {
                stage: "gen".into(),
                detail: serde_json::json!({ "params": p, "bits": h.instance.hyperedges().len(), "file": "instance.hpg" }),
            });
            Source::Hyper(Arc::new(h.instance), h.planted)
        }
        _ => unreachable!("checked"),
    };
    let (input_bits, planted) = match &source {
        Source::Graph(g, p) => (g.edges().len(), p.clone()),
        Source::Hyper(h, p) => (h.hyperedges().len(), p.clone()),
    };
    let meter = Arc::new(WorkspaceMeter::for_input(input_bits, cfg.workspace_constant, cfg.strict_workspace));
    let mut secret = SecretRecord { label: if planted.is_some() { "planted" } else { "null" }.into(), event_ok: None };

    let mut view: Option<HarvestView> = None;
    for st in &cfg.stages[1..] {
        match st {
            StageSpec::Harvest { scheme } => {
                let opts = HarvestOptions { trace: false, meter: Some(meter.clone()) };
                let v = match &source {
                    Source::Graph(g, _) => harvest_graph(g.clone(), *scheme, &opts)?,
                    Source::Hyper(h, _) => match scheme {
                        SchemeParams::Clhpc { k } => harvest_clhpc(h.clone(), *k, &opts)?,
                        _ => unreachable!("checked"),
                    },
                };
                let sub = materialize(&v.sub)?;
                write(dir, "sub.pcg", &encode_graph(&sub), &mut files)?;
                secret.event_ok = v.event_ok(planted.as_deref());
                records.push(StageRecord {
                    stage: "harvest".into(),
                    detail: serde_json::json!({
                        "scheme": scheme,
                        "budget": v.budget,
                        "budget_formula": v.budget_formula,
                        "ordering": v.scheme.ordering(),
                        "sub": v.sub.shape(),
                        "rand_is_pseudo": v.rand_is_pseudo,
                        "warnings": v.warnings,
                        "file": "sub.pcg",
                    }),
                });
                view = Some(v);
            }
            StageSpec::Reduce { target, rand } => {
                let sub: Arc<dyn GraphOracle> = match (&view, &source) {
                    (Some(v), _) => Arc::new(v.sub.clone()),
                    (None, Source::Graph(g, _)) => g.clone(),
                    (None, Source::Hyper(..)) => unreachable!("checked"),
                };
                let tape = match rand {
                    RandSpec::Harvested => {
                        let r = &view.as_ref().expect("checked").rand;
                        r.slice(0, r.len(), AccessPolicy::MultipleAccess)?
                    }
                    RandSpec::Seed(s) => {
                        let len = needed_rand(target)?;
                        BitStream::new(*s).tape(len)
                    }
                };
                let (bytes, mut detail) = run_reduction(target, sub, tape, &meter)?;
                write(dir, "reduced.red", &bytes, &mut files)?;
                detail["rand"] = serde_json::to_value(rand)?;
                detail["file"] = "reduced.red".into();
                records.push(StageRecord { stage: "reduce".into(), detail });
            }
            StageSpec::Gen { .. } => unreachable!("checked"),
        }
    }

    let report = meter.report();
    if cfg.strict_workspace && !report.violations.is_empty() {
        return Err(Error::LimitExceeded {
            label: report.violations.join("; "),
            live: report.peak,
            limit: report.limit,
        });
    }
    write(dir, "secret.json", &json_bytes(&secret)?, &mut files)?;
    let mut listed = files.clone();
    listed.push("manifest.json".into());
    let manifest = Manifest {
        seed: cfg.seed,
        generator: STREAM_GENERATOR_ID.into(),
        strict_workspace: cfg.strict_workspace,
        stages: records,
        workspace: report,
        files: listed,
    };
    write(dir, "manifest.json", &json_bytes(&manifest)?, &mut files)?;
    Ok(manifest)
}

pub fn needed_rand(target: &ReduceTarget) -> Result<u64> {
    Ok(match target {
        ReduceTarget::Spca { n, m, k, mu, delta, d_bar, .. } => {
            spca_derive_params(*n, *m, *k, *mu, *delta, *d_bar)?.rand_len()
        }
        ReduceTarget::Submat { ell, k_s, p_bar, k_bar, lambda, .. } => {
            SubmatParams::derive(*ell, *k_s, *p_bar, *k_bar, &parse_rational(lambda)?)?.rand_len()
        }
        ReduceTarget::Kwise { alpha, ell_exp, k, s_bar } => {
            KwiseParams::derive(*alpha, *ell_exp, *k, *s_bar)?.layout().rand_len()
        }
    })
}

fn budget_check(needed: u64, tape: &BitTape) -> Result<()> {
    if tape.len() < needed {
        return Err(Error::InsufficientRandomness { needed, available: tape.len() });
    }
    Ok(())
}

/// Rebases a tape so the reduction's read counters start from zero.
fn fresh(tape: &BitTape, len: u64) -> Result<BitTape> {
    tape.slice(0, len, AccessPolicy::MultipleAccess)
}

/// Runs one reduction with every entry metered. Returns the encoded `RED1`
/// file and a summary of the randomness used.
pub fn run_reduction(
    target: &ReduceTarget,
    sub: Arc<dyn GraphOracle>,
    tape: BitTape,
    meter: &WorkspaceMeter,
) -> Result<(Vec<u8>, Value)> {
    let (header, data, needed, formula, consumed) = match target {
        ReduceTarget::Spca { n, m, k, mu, delta, d_bar, require_region } => {
            let p = spca_derive_params(*n, *m, *k, *mu, *delta, *d_bar)?;
            if *require_region {
                p.require_region()?;
            }
            budget_check(p.rand_len(), &tape)?;
            let t = fresh(&tape, p.rand_len())?;
            let inst = spca_reduce(sub, &p, t)?;
            let mut data = Vec::with_capacity((p.d_bar * p.n_bar) as usize);
            for i in 1..=p.d_bar {
                for j in 1..=p.n_bar {
                    data.push(inst.entry_metered(i, j, Some(meter))? as u8);
                }
            }
            let header = ReducedHeader {
                target: "spca".into(),
                rows: p.d_bar,
                cols: p.n_bar,
                encoding: Encoding::Int8,
                t_bits: None,
                params: serde_json::to_value(&p)?,
            };
            (header, data, p.rand_len(), p.rand_formula(), inst.rand().consumed())
        }
        ReduceTarget::Submat { ell, k_s, p_bar, k_bar, lambda, q0, q1 } => {
            let p = SubmatParams::derive(*ell, *k_s, *p_bar, *k_bar, &parse_rational(lambda)?)?;
            let (d0, d1) = five_point_pair(p.w_bar, p.t_cap)?;
            let load = |q: &Option<Vec<PmfEntry>>, d: DiscretePmf| match q {
                Some(e) => DiscretePmf::from_entries(e, p.w_bar, p.t_cap),
                None => Ok(d),
            };
            let (a, b) = (load(q0, d0)?, load(q1, d1)?);
            budget_check(p.rand_len(), &tape)?;
            let t = fresh(&tape, p.rand_len())?;
            let inst = submat_reduce(sub, &p, t, a, b)?;
            let mut data = Vec::with_capacity((p.p_bar * p.p_bar * 8) as usize);
            for i in 1..=p.p_bar {
                for j in 1..=p.p_bar {
                    let x = inst.entry_metered(i, j, Some(meter))?;
                    let raw = i64::try_from(x.raw).map_err(|_| Error::param("entry does not fit in i64"))?;
                    data.extend(raw.to_le_bytes());
                }
            }
            let header = ReducedHeader {
                target: "submat".into(),
                rows: p.p_bar,
                cols: p.p_bar,
                encoding: Encoding::I64Le,
                t_bits: Some(p.t_bar),
                params: serde_json::to_value(&p)?,
            };
            (header, data, p.rand_len(), p.rand_formula(), inst.rand().consumed())
        }
        ReduceTarget::Kwise { alpha, ell_exp, k, s_bar } => {
            let p = KwiseParams::derive(*alpha, *ell_exp, *k, *s_bar)?;
            let layout = p.layout();
            budget_check(layout.rand_len(), &tape)?;
            let t = fresh(&tape, layout.rand_len())?;
            let inst = kwise_reduce(sub, layout, t)?;
            let mut bits = PackedBits::zeros(layout.s_bar * layout.n_bar);
            for s in 1..=layout.s_bar {
                for c in 1..=layout.n_bar {
                    bits.set((s - 1) * layout.n_bar + c - 1, inst.bit_metered(s, c, Some(meter))?);
                }
            }
            let header = ReducedHeader {
                target: "kwise".into(),
                rows: layout.s_bar,
                cols: layout.n_bar,
                encoding: Encoding::PackedBits,
                t_bits: None,
                params: serde_json::to_value(&p)?,
            };
            (header, bits.to_bytes(), layout.rand_len(), layout.rand_formula(), inst.rand().consumed())
        }
    };
    let detail = serde_json::json!({
        "target": target.name(),
        "rand_needed": needed,
        "rand_formula": formula,
        "rand_available": tape.len(),
        "rand_consumed": consumed,
        "rows": header.rows,
        "cols": header.cols,
    });
    Ok((encode_reduced(&header, &data)?, detail))
}
