//! `pcspace`: generate planted-clique instances, harvest randomness from
//! them, run the reductions and check the results.
//!
//! Exit status: 0 on success, 1 on error, 2 when a verification fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pcspace::fixed::PmfEntry;
use pcspace::format::{self, Instance, Sidecar};
use pcspace::graph::{
    sample_graph, sample_hypergraph, DistributionSpec, GraphInstance, GraphOracle, GraphParams, HypergraphParams,
    HypergraphVariant, Labeled,
};
use pcspace::harvest::{harvest_clhpc, harvest_graph, HarvestOptions, HarvestView, SchemeParams};
use pcspace::oracle::audit::workspace_audit;
use pcspace::oracle::cases;
use pcspace::oracle::clique::{clique_union_bound, max_clique_hypergraph, AsHypergraph};
use pcspace::oracle::stats::{stat_battery, BatterySpec, BatteryTest, DEFAULT_ALPHA};
use pcspace::pipeline::{
    needed_rand, run_pipeline, run_reduction, PipelineConfig, ReduceTarget, DEFAULT_WORKSPACE_CONSTANT,
};
use pcspace::tape::{BitStream, WorkspaceMeter, STREAM_GENERATOR_ID};
use pcspace::{Error, Result};

const SEED_ENV: &str = "PCSPACE_SEED";

#[derive(Parser)]
#[command(name = "pcspace", version, about = "Space-bounded planted clique reductions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample an instance and write it with a secret sidecar.
    Gen(GenArgs),
    /// Split an instance into a sub-instance and a randomness tape.
    Harvest(HarvestArgs),
    /// Run SPCA, submatrix or k-wise reduction on a graph file.
    Reduce(ReduceArgs),
    /// Exact and statistical checks.
    Verify(VerifyArgs),
    /// Run a JSON-configured chain of stages.
    Pipeline(PipelineArgs),
    /// Summarise an instance or reduced file.
    Inspect { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Er,
    Pc,
    Kpc,
    Clkpc,
    Her,
    Hpc,
    Clhpc,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    variant: Variant,
    /// Vertex count (derived as ell*k for partite variants).
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Block size of partite variants.
    #[arg(long, default_value_t = 0)]
    ell: u32,
    /// Uniformity of hypergraph variants.
    #[arg(long, default_value_t = 3)]
    s: u32,
}

enum Spec {
    Graph(GraphParams),
    Hyper(HypergraphParams),
}

impl InstanceArgs {
    fn spec(&self) -> Result<Spec> {
        let need_n = || self.n.ok_or_else(|| Error::InvalidParameter("--n is required for this variant".into()));
        let partite = |p: GraphParams| -> Result<Spec> {
            if let Some(n) = self.n {
                if n != p.n {
                    return Err(Error::InvalidParameter(format!("--n {n} differs from ell*k = {}", p.n)));
                }
            }
            p.validate()?;
            Ok(Spec::Graph(p))
        };
        let hyper = |variant| -> Result<Spec> {
            let p = HypergraphParams { variant, n: need_n()?, s: self.s, k: self.k };
            p.validate()?;
            Ok(Spec::Hyper(p))
        };
        match self.variant {
            Variant::Er => Ok(Spec::Graph(GraphParams::er(need_n()?))),
            Variant::Pc => {
                let p = GraphParams::pc(need_n()?, self.k);
                p.validate()?;
                Ok(Spec::Graph(p))
            }
            Variant::Kpc => partite(GraphParams::kpc(self.ell, self.k)),
            Variant::Clkpc => partite(GraphParams::clkpc(self.ell, self.k)),
            Variant::Her => hyper(HypergraphVariant::Her),
            Variant::Hpc => hyper(HypergraphVariant::Hpc),
            Variant::Clhpc => hyper(HypergraphVariant::Clhpc),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Output file; the sidecar goes to `<out>.secret.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    PcBasic,
    KpcBasic,
    KpcAdvanced,
    Clkpc,
    Clhpc,
}

#[derive(Args)]
struct HarvestArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Planted size of the target shape.
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Harvested vertex count for the basic schemes.
    #[arg(long, default_value_t = 0)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    ell: u32,
    #[arg(long = "k-s", default_value_t = 0)]
    k_s: u32,
    #[arg(long = "in")]
    input: PathBuf,
    /// Sub-instance output (PCG1); the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
    /// Sidecar of the input; when given, the event flag is written to
    /// `<out>.secret.json`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Spca,
    Submat,
    Kwise,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    target: TargetArg,
    /// Parameters as inline JSON or `@file`.
    #[arg(long)]
    params: String,
    /// Sub-instance (PCG1).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "rand-seed", env = SEED_ENV, default_value_t = 0)]
    rand_seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Q0 pmf file for submat.
    #[arg(long)]
    q0: Option<PathBuf>,
    /// Q1 pmf file for submat.
    #[arg(long)]
    q1: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Tv,
    Marginals,
    Partite,
    CliqueBound,
    Workspace,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum TvCase {
    All,
    SelfReducibility,
    PcBasic,
    Clkpc,
    Clhpc,
    Relabel,
    Permutation,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    test: TestArg,
    #[arg(long, value_enum, default_value_t = TvCase::All)]
    case: TvCase,
    /// Instance family for sampled tests.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    ell: u32,
    #[arg(long, default_value_t = 3)]
    s: u32,
    /// Reference distribution for `marginals` as GraphParams JSON; defaults
    /// to the sampled family.
    #[arg(long)]
    against: Option<String>,
    /// Clique size threshold for `clique-bound`.
    #[arg(long, default_value_t = 8)]
    t: u32,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Source size for `workspace`.
    #[arg(long = "input-bits", default_value_t = 1_000_000)]
    input_bits: u64,
    #[arg(long, default_value_t = DEFAULT_WORKSPACE_CONSTANT)]
    constant: u64,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Used when the config has no seed.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    std::fs::write(path, b)?;
    Ok(())
}

fn print(v: &Value) {
    use std::io::Write;
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn gen(a: &GenArgs) -> Result<bool> {
    let mut rng = BitStream::new(a.seed);
    let (bytes, sidecar, summary) = match a.inst.spec()? {
        Spec::Graph(p) => {
            let g = sample_graph(&p, &mut rng)?;
            (
                format::encode_graph(&g.instance),
                Sidecar::for_graph(&g, a.seed, STREAM_GENERATOR_ID),
                json!({ "params": p }),
            )
        }
        Spec::Hyper(p) => {
            let h = sample_hypergraph(&p, &mut rng)?;
            (
                format::encode_hypergraph(&h.instance),
                Sidecar::for_hypergraph(&h, a.seed, STREAM_GENERATOR_ID),
                json!({ "params": p }),
            )
        }
    };
    std::fs::write(&a.out, bytes)?;
    write_json(&with_suffix(&a.out, ".secret.json"), &serde_json::to_value(&sidecar)?)?;
    print(&json!({ "file": a.out, "seed": a.seed, "generator": STREAM_GENERATOR_ID, "instance": summary }));
    Ok(true)
}

fn scheme_params(a: &HarvestArgs) -> SchemeParams {
    match a.scheme {
        SchemeArg::PcBasic => SchemeParams::PcBasic { k: a.k, m: a.m },
        SchemeArg::KpcBasic => SchemeParams::KpcBasic { ell: a.ell, k: a.k, k_s: a.k_s, m: a.m },
        SchemeArg::KpcAdvanced => SchemeParams::KpcAdvanced { ell: a.ell, k: a.k, k_s: a.k_s },
        SchemeArg::Clkpc => SchemeParams::Clkpc { ell: a.ell, k: a.k, k_s: a.k_s },
        SchemeArg::Clhpc => SchemeParams::Clhpc { k: a.k },
    }
}

fn sub_to_graph(v: &HarvestView) -> Result<GraphInstance> {
    let sh = v.sub.shape();
    let bits = cases::graph_bits(&v.sub)?;
    let k = if sh.variant == pcspace::graph::GraphVariant::Er { 0 } else { sh.k };
    GraphInstance::new(GraphParams { variant: sh.variant, n: sh.n, k, ell: sh.ell }, bits)
}

fn harvest(a: &HarvestArgs) -> Result<bool> {
    let params = scheme_params(a);
    let opts = HarvestOptions::default();
    let view = match (format::read_instance(&a.input)?, params) {
        (Instance::Hypergraph(h), SchemeParams::Clhpc { k }) => harvest_clhpc(Arc::new(h), k, &opts)?,
        (
            Instance::Graph(g),
            p @ (SchemeParams::PcBasic { .. }
            | SchemeParams::KpcBasic { .. }
            | SchemeParams::KpcAdvanced { .. }
            | SchemeParams::Clkpc { .. }),
        ) => harvest_graph(Arc::new(g), p, &opts)?,
        _ => return Err(Error::StageIncompatible("scheme does not match the input file kind".into())),
    };
    let sub = sub_to_graph(&view)?;
    std::fs::write(&a.out, format::encode_graph(&sub))?;
    let manifest = json!({
        "input": a.input,
        "scheme": params,
        "sub": view.sub.shape(),
        "sub_file": a.out,
        "rand": {
            "budget": view.budget,
            "budget_formula": view.budget_formula,
            "ordering": view.scheme.ordering(),
            "pseudo": view.rand_is_pseudo,
        },
        "warnings": view.warnings,
    });
    write_json(&with_suffix(&a.out, ".manifest.json"), &manifest)?;
    if let Some(sc) = &a.sidecar {
        let side = Sidecar::read(sc)?;
        let secret = json!({ "label": side.label, "event_ok": view.event_ok(side.planted.as_deref()) });
        write_json(&with_suffix(&a.out, ".secret.json"), &secret)?;
    }
    print(&manifest);
    Ok(true)
}

fn read_params(s: &str) -> Result<Value> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => s.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn reduce(a: &ReduceArgs) -> Result<bool> {
    let mut params = read_params(&a.params)?;
    let obj = params.as_object_mut().ok_or_else(|| Error::InvalidParameter("--params must be a JSON object".into()))?;
    let name = match a.target {
        TargetArg::Spca => "spca",
        TargetArg::Submat => "submat",
        TargetArg::Kwise => "kwise",
    };
    obj.insert("target".into(), name.into());
    for (key, path) in [("q0", &a.q0), ("q1", &a.q1)] {
        if let Some(p) = path {
            let entries: Vec<PmfEntry> = serde_json::from_slice(&std::fs::read(p)?)?;
            obj.insert(key.into(), serde_json::to_value(entries)?);
        }
    }
    let target: ReduceTarget = serde_json::from_value(params)?;
    let Instance::Graph(g) = format::read_instance(&a.input)? else {
        return Err(Error::StageIncompatible("reductions take a graph (PCG1) input".into()));
    };
    let bits = g.edges().len();
    let tape = BitStream::new(a.rand_seed).tape(needed_rand(&target)?);
    let meter = WorkspaceMeter::for_input(bits, DEFAULT_WORKSPACE_CONSTANT, a.strict);
    let sub: Arc<dyn GraphOracle> = Arc::new(g);
    let (bytes, mut detail) = run_reduction(&target, sub, tape, &meter)?;
    std::fs::write(&a.out, bytes)?;
    detail["file"] = json!(a.out);
    detail["rand_seed"] = a.rand_seed.into();
    detail["workspace"] = serde_json::to_value(meter.report())?;
    print(&detail);
    Ok(true)
}

fn sampled_graphs(a: &VerifyArgs) -> Result<(GraphParams, Vec<Labeled<GraphInstance>>)> {
    let inst = InstanceArgs {
        variant: a.variant.ok_or_else(|| Error::InvalidParameter("--variant is required".into()))?,
        n: a.n,
        k: a.k,
        ell: a.ell,
        s: a.s,
    };
    let Spec::Graph(p) = inst.spec()? else {
        return Err(Error::UnsupportedVariant("sampled batteries take graph variants".into()));
    };
    let mut rng = BitStream::new(a.seed);
    let samples = (0..a.samples).map(|_| sample_graph(&p, &mut rng)).collect::<Result<Vec<_>>>()?;
    Ok((p, samples))
}

fn verify(a: &VerifyArgs) -> Result<bool> {
    let (report, pass) = match a.test {
        TestArg::Tv => {
            type Case = (TvCase, fn() -> Result<cases::ExactCheck>);
            let all: [Case; 6] = [
                (TvCase::SelfReducibility, || cases::self_reducibility(2, 3, 2)),
                (TvCase::PcBasic, || cases::harvest_pc_basic_exact(5, 1, 2)),
                (TvCase::Clkpc, || cases::harvest_clkpc_exact(2, 1, 1)),
                (TvCase::Clhpc, || cases::harvest_clhpc_exact(3, 4, 2)),
                (TvCase::Relabel, || cases::relabel_exact(2, 2)),
                (TvCase::Permutation, || cases::permutation_exact(2, 6)),
            ];
            let mut out = Vec::new();
            let mut pass = true;
            for (c, f) in all {
                if a.case == TvCase::All || a.case == c {
                    let r = f()?;
                    pass &= r.tv == num_rational::BigRational::from_integer(0.into());
                    out.push(r.to_json());
                }
            }
            (json!({ "test": "tv", "checks": out }), pass)
        }
        TestArg::Marginals => {
            let (p, samples) = sampled_graphs(a)?;
            let against: GraphParams = match &a.against {
                Some(s) => serde_json::from_str(s)?,
                None => p,
            };
            let spec = BatterySpec {
                alpha: a.alpha,
                tests: vec![BatteryTest::EdgeMarginals { against: DistributionSpec::Graph(against) }],
            };
            let r = stat_battery(&samples, &spec)?;
            (serde_json::to_value(&r)?, r.pass())
        }
        TestArg::Partite => {
            let (p, samples) = sampled_graphs(a)?;
            let mut tests = vec![BatteryTest::Partite];
            if p.variant == pcspace::graph::GraphVariant::Clkpc {
                tests.push(BatteryTest::Leakage);
            }
            let r = stat_battery(&samples, &BatterySpec { alpha: a.alpha, tests })?;
            (serde_json::to_value(&r)?, r.pass())
        }
        TestArg::CliqueBound => {
            let n = a.n.ok_or_else(|| Error::InvalidParameter("--n is required".into()))?;
            let bound = clique_union_bound(n.into(), a.t.into(), a.s.into());
            let mut rng = BitStream::new(a.seed);
            let mut hits = 0u64;
            let mut largest = 0;
            for _ in 0..a.samples {
                let size = if a.s == 2 {
                    let g = sample_graph(&GraphParams::er(n), &mut rng)?.instance;
                    max_clique_hypergraph(&AsHypergraph(&g))?
                } else {
                    let p = HypergraphParams { variant: HypergraphVariant::Her, n, s: a.s, k: 0 };
                    max_clique_hypergraph(&sample_hypergraph(&p, &mut rng)?.instance)?
                };
                largest = largest.max(size);
                hits += u64::from(size >= a.t);
            }
            let report = json!({
                "test": "clique-bound",
                "n": n, "s": a.s, "t": a.t,
                "union_bound": pcspace::reduce::rational_string(&bound),
                "union_bound_f64": num_traits::ToPrimitive::to_f64(&bound),
                "samples": a.samples,
                "samples_reaching_t": hits,
                "largest": largest,
            });
            (report, hits == 0)
        }
        TestArg::Workspace => {
            let r = workspace_audit(a.input_bits, a.constant, a.strict, a.seed)?;
            let pass = r.iter().all(|e| e.pass);
            (json!({ "test": "workspace", "entries": r }), pass)
        }
    };
    print(&json!({ "pass": pass, "report": report }));
    Ok(pass)
}

fn pipeline(a: &PipelineArgs) -> Result<bool> {
    let mut v: Value = serde_json::from_slice(&std::fs::read(&a.config)?)?;
    let obj = v.as_object_mut().ok_or_else(|| Error::InvalidParameter("config must be a JSON object".into()))?;
    obj.entry("seed").or_insert(a.seed.into());
    if let Some(d) = &a.out_dir {
        obj.insert("out_dir".into(), json!(d));
    }
    let cfg: PipelineConfig = serde_json::from_value(v)?;
    let m = run_pipeline(&cfg)?;
    print(&serde_json::to_value(&m)?);
    Ok(m.workspace.violations.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen(a) => gen(&a),
        Cmd::Harvest(a) => harvest(&a),
        Cmd::Reduce(a) => reduce(&a),
        Cmd::Verify(a) => verify(&a),
        Cmd::Pipeline(a) => pipeline(&a),
        Cmd::Inspect { path } => {
            print(&format::inspect(&path)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
