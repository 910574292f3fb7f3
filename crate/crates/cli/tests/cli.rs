//! Runs the `da2` binary and reads back what it writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use da2_core::evaluate::curves_from_csv;
use da2_core::{HalfspaceSelection, Method, QuerySet, RunConfig};

fn da2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_da2"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = da2(args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn with<'a>(cmd: &[&'a str], common: &[&'a str]) -> Vec<&'a str> {
    [cmd, common].concat()
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn halve_blobs_gives_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "halve",
        "--dataset",
        "blobs:3x50",
        "--seed",
        "1",
        "--out-dir",
        out,
    ]);
    let run = dir.path().join("halve-seed1");
    let sel: HalfspaceSelection = serde_json::from_str(&read(run.join("halfspace.json"))).unwrap();
    assert_eq!(sel.indices.len(), 75);
    let cfg = RunConfig::from_json(&read(run.join("config.json"))).unwrap();
    assert_eq!(cfg.seed, 1);
}

#[test]
fn bounds_prints_value() {
    let s = ok(&["bounds", "--eps", "0.5", "--delta", "0.05", "--m", "2"]);
    let v: f64 = s.trim().rsplit('=').next().unwrap().parse().unwrap();
    assert!((v - 817.97).abs() < 0.01, "{s}");
}

#[test]
fn identity_gap_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "perceptron",
        "identity",
        "--theta-t",
        "0.3",
        "--theta-next",
        "0.7",
        "--n",
        "1000",
        "--out-dir",
        out,
    ]);
    let v: serde_json::Value = serde_json::from_str(&read(
        dir.path().join("perceptron-identity-seed0/identity.json"),
    ))
    .unwrap();
    assert!(v["gap"].as_f64().unwrap() < 1e-12);
}

#[test]
fn emitted_files_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let common = ["--dataset", "blobs:2x12", "--seed", "4", "--out-dir", out];

    ok(&with(&["query", "--k", "3", "--method", "ted"], &common));
    let q: QuerySet =
        serde_json::from_str(&read(dir.path().join("query-seed4/query.json"))).unwrap();
    assert_eq!((q.indices.len(), q.method), (3, Method::Ted));

    ok(&with(&["split", "--k", "2"], &common));
    let v: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("split-seed4/partition.json"))).unwrap();
    let partition: da2_core::BallPartition =
        serde_json::from_value(v["partition"].clone()).unwrap();
    assert_eq!(partition.balls.len(), 2);

    ok(&with(
        &[
            "compare",
            "--budgets",
            "2,4",
            "--trials",
            "3",
            "--methods",
            "da2,random",
        ],
        &common,
    ));
    let curves = curves_from_csv(&read(dir.path().join("compare-seed4/compare.csv"))).unwrap();
    assert_eq!(curves.len(), 2);
    assert_eq!(curves[1].budgets, vec![2, 4]);

    ok(&with(
        &["passive", "--budgets", "3", "--trials", "2"],
        &common,
    ));
    let curves = curves_from_csv(&read(dir.path().join("passive-seed4/passive.csv"))).unwrap();
    assert_eq!(
        curves.iter().map(|c| c.method.as_str()).collect::<Vec<_>>(),
        ["full", "halfspace"]
    );

    ok(&with(&["score", "--dump-kernel"], &common));
    let kernel = read(dir.path().join("score-seed4/kernel.csv"));
    assert_eq!(kernel.lines().count(), 24);
    let v: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("score-seed4/scores.json"))).unwrap();
    assert_eq!(v["scores"].as_array().unwrap().len(), 24);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(
        &cfg_path,
        r#"{"seed": 9, "sigma": 2.5, "dataset": "disk:40"}"#,
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "halve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--sigma",
        "1.0",
        "--out-dir",
        out,
    ]);
    let cfg = RunConfig::from_json(&read(dir.path().join("halve-seed9/config.json"))).unwrap();
    assert_eq!(
        (cfg.sigma, cfg.dataset.to_string().as_str()),
        (1.0, "disk:40")
    );
}

#[test]
fn exit_codes() {
    assert_eq!(da2(&["nonsense"]).status.code(), Some(2));
    assert_eq!(da2(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        da2(&["halve", "--sigma=-1", "--out-dir", out])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        da2(&["split", "--k", "1", "--out-dir", out]).status.code(),
        Some(1)
    );
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"sigmaa": 1}"#).unwrap();
    assert_eq!(
        da2(&["halve", "--config", bad.to_str().unwrap(), "--out-dir", out])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn perceptron_trace_and_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "perceptron",
        "trace",
        "--n",
        "200",
        "--start",
        "at-target",
        "--noise",
        "adversarial",
        "--noise-level",
        "0.05",
        "--out-dir",
        out,
    ]);
    let trace = read(dir.path().join("perceptron-trace-seed0/trace.csv"));
    assert_eq!(trace.lines().count(), 201);
    ok(&[
        "perceptron",
        "monotonicity",
        "--steps",
        "100",
        "--trials",
        "5",
        "--out-dir",
        out,
    ]);
    let v: serde_json::Value = serde_json::from_str(&read(
        dir.path()
            .join("perceptron-monotonicity-seed0/monotonicity.json"),
    ))
    .unwrap();
    assert!((0.0..=1.0).contains(&v["estimate"].as_f64().unwrap()));
}
