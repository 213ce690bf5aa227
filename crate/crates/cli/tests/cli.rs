//! Drives the binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcspace")).current_dir(dir).env_remove("PCSPACE_SEED").args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn gen_harvest_reduce_inspect() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    json(&run(p, &["gen", "--variant", "clkpc", "--ell", "4", "--k", "12", "--seed", "3", "--out", "g.pcg"]));
    let side: Value = serde_json::from_slice(&std::fs::read(p.join("g.pcg.secret.json")).unwrap()).unwrap();
    assert_eq!(side["label"], "planted");

    let m = json(&run(
        p,
        &[
            "harvest",
            "--scheme",
            "clkpc",
            "--ell",
            "4",
            "--k",
            "3",
            "--k-s",
            "2",
            "--in",
            "g.pcg",
            "--out",
            "sub.pcg",
            "--sidecar",
            "g.pcg.secret.json",
        ],
    ));
    assert_eq!(m["rand"]["budget"], 66);
    assert!(p.join("sub.pcg.manifest.json").exists());
    assert!(p.join("sub.pcg.secret.json").exists());

    let params = r#"{"ell":4,"k_s":2,"p_bar":2,"k_bar":1,"lambda":"1/100"}"#;
    let a = json(&run(
        p,
        &["reduce", "--target", "submat", "--params", params, "--in", "sub.pcg", "--rand-seed", "5", "--out", "a.red"],
    ));
    assert_eq!(a["rows"], 2);
    json(&run(
        p,
        &["reduce", "--target", "submat", "--params", params, "--in", "sub.pcg", "--rand-seed", "5", "--out", "b.red"],
    ));
    assert_eq!(std::fs::read(p.join("a.red")).unwrap(), std::fs::read(p.join("b.red")).unwrap());

    let i = json(&run(p, &["inspect", "a.red"]));
    assert_eq!(i["format"], "RED1");
}

#[test]
fn seed_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let gen = |out: &str, seed: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_pcspace"))
            .current_dir(p)
            .env("PCSPACE_SEED", seed)
            .args(["gen", "--variant", "pc", "--n", "20", "--k", "5", "--out", out])
            .output()
            .unwrap();
        json(&o)["seed"].clone()
    };
    assert_eq!(gen("a.pcg", "42"), 42);
    gen("b.pcg", "42");
    assert_eq!(std::fs::read(p.join("a.pcg")).unwrap(), std::fs::read(p.join("b.pcg")).unwrap());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let ok = run(p, &["verify", "--test", "tv", "--case", "relabel"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["pass"], true);

    let fail = run(p, &["verify", "--test", "workspace", "--input-bits", "20000", "--constant", "1"]);
    assert_eq!(fail.status.code(), Some(2));

    let err = run(p, &["reduce", "--target", "kwise", "--params", "{}", "--in", "missing.pcg", "--out", "x"]);
    assert_eq!(err.status.code(), Some(1));
    let err = run(p, &["inspect", "missing.pcg"]);
    assert_eq!(err.status.code(), Some(1));
}

#[test]
fn pipeline_from_config() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let cfg = serde_json::json!({
        "seed": 9,
        "out_dir": "run",
        "stages": [
            { "stage": "gen", "graph": { "variant": "clkpc", "n": 192, "k": 48, "ell": 4 } },
            { "stage": "harvest", "scheme": "clkpc", "ell": 4, "k": 12, "k_s": 2 },
            { "stage": "reduce", "target": "submat", "ell": 4, "k_s": 2, "p_bar": 2, "k_bar": 1, "lambda": "1/100" }
        ]
    });
    std::fs::write(p.join("cfg.json"), cfg.to_string()).unwrap();
    let m = json(&run(p, &["pipeline", "--config", "cfg.json"]));
    assert_eq!(m["seed"], 9);
    assert!(p.join("run/reduced.red").exists());
    assert!(p.join("run/manifest.json").exists());
}
