use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_limfix"))
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

/// Runs the binary and parses the last stdout line as JSON.
fn run(args: &[&str]) -> (i32, Option<Value>, String) {
    let out = bin().args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = stdout.lines().last().and_then(|l| serde_json::from_str(l).ok());
    (out.status.code().unwrap(), report, stdout)
}

fn affine() -> Value {
    json!({
        "schema": 1,
        "space": {"kind": "real", "dim": 1},
        "function": {"builtin": "affine", "a": [[0.5]], "b": [1.0]},
        "start": [0.0],
        "structure": {"kind": "distance", "distance": {"kind": "euclidean"}},
        "mode": "ciric_distance",
        "contraction": {"lambda": {"kind": "scale", "c": 0.5}}
    })
}

fn mod3() -> Value {
    json!({
        "schema": 1,
        "space": {"kind": "finite", "size": 3},
        "function": {"builtin": "mod_cycle", "size": 3, "shift": 1},
        "start": 0,
        "structure": {"kind": "orbit"},
        "limit": {"kind": "discrete"}
    })
}

#[test]
fn affine_ciric_solves_to_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "affine.json", &affine());
    let (code, report, _) = run(&["solve", cfg.to_str().unwrap()]);
    let report = report.unwrap();
    assert_eq!(code, 0);
    assert_eq!(report["exit_code"], 0);
    assert_eq!(report["outcome"]["outcome"], "fixed_point");
    let x = report["outcome"]["point"]["real"][0].as_f64().unwrap();
    assert!((x - 2.0).abs() <= 1e-9);
    assert_eq!(report["outcome"]["certificate"]["contraction"]["kind"], "sandwich");
}

#[test]
fn mod3_cycle_is_a_fixed_set() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "mod3.json", &mod3());
    let (code, report, _) = run(&["solve", cfg.to_str().unwrap()]);
    let report = report.unwrap();
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["outcome"], "fixed_set");
    let idx: Vec<u64> = report["outcome"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["label"]["index"].as_u64().unwrap())
        .collect();
    assert_eq!(idx, [0, 1, 2]);
}

#[test]
fn harmonic_under_capped_psi_is_undetermined() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "harmonic.json",
        &json!({
            "schema": 1,
            "space": {"kind": "real", "dim": 2},
            "function": {"builtin": "harmonic"},
            "start": [0.0, 0.0],
            "structure": {"kind": "psi", "rule": "norm_sum", "cap": 100.0}
        }),
    );
    let (code, report, _) = run(&["solve", cfg.to_str().unwrap()]);
    let report = report.unwrap();
    assert_eq!(code, 2);
    assert_eq!(report["outcome"]["outcome"], "undetermined");
    assert_eq!(report["outcome"]["certificate"]["stage"], "cauchy");
    assert!(report["outcome"]["reason"].as_str().unwrap().contains("refuted"));
}

#[test]
fn trace_and_report_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "affine.json", &affine());
    let trace = dir.path().join("trace.jsonl");
    let rep = dir.path().join("report.json");
    let (code, report, _) = run(&[
        "solve",
        cfg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() > 10);
    assert_eq!(lines[0]["n"], 0);
    assert_eq!(lines[1]["step_distance"]["scalar"], 1.0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(saved["certificate_digest"], report.unwrap()["certificate_digest"]);
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "affine.json", &affine());
    let (_, a, _) = run(&["solve", cfg.to_str().unwrap()]);
    let (_, b, _) = run(&["solve", cfg.to_str().unwrap()]);
    let (a, b) = (a.unwrap(), b.unwrap());
    assert_eq!(a["certificate_digest"], b["certificate_digest"]);
    assert_eq!(a["config_hash"], b["config_hash"]);
}

#[test]
fn premise_violation_exits_two() {
    let mut cfg = affine();
    cfg["function"]["a"] = json!([[1.0]]);
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "shift.json", &cfg);
    let (code, report, _) = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(report.unwrap()["error"].as_str().unwrap().contains("stage contraction"));
}

#[test]
fn schema_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let mut bad = affine();
    bad["schema"] = json!(9);
    let p = write(dir.path(), "schema.json", &bad);
    let (code, report, _) = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(report.unwrap()["error"].as_str().unwrap().contains("schema 9"));

    let mut unknown = affine();
    unknown["structure"]["radius"] = json!(1.0);
    let p = write(dir.path(), "unknown.json", &unknown);
    let (code, report, _) = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(report.unwrap()["error"].as_str().unwrap().contains("line"));

    let (code, _, _) = run(&["solve", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn max_prefix_env_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "affine.json", &affine());
    let out = bin()
        .args(["solve", cfg.to_str().unwrap()])
        .env("LIMFIX_MAX_PREFIX", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_targets() {
    let dir = TempDir::new().unwrap();
    let mut pm = affine();
    pm["structure"]["distance"] = json!({"kind": "partial_metric_max"});
    let p = write(dir.path(), "pm.json", &pm);
    let (code, report, _) = run(&["check", p.to_str().unwrap(), "--target", "distance-axiom"]);
    assert_eq!(code, 0, "{report:?}");
    assert_eq!(report.unwrap()["verdict"]["verdict"], "certified");

    let p = write(dir.path(), "mod3.json", &mod3());
    let (code, report, _) = run(&["check", p.to_str().unwrap(), "--target", "structure-scs"]);
    assert_eq!(code, 2);
    let v = report.unwrap();
    assert_eq!(v["verdict"]["verdict"], "refuted");
    assert!(v["verdict"]["note"].as_str().unwrap().contains("z₁ ≠ zₙ"));

    let mut shift = affine();
    shift["contraction"]["lambda"] = json!({"kind": "shift", "c": 1.0});
    let p = write(dir.path(), "shift.json", &shift);
    let (code, report, _) = run(&["check", p.to_str().unwrap(), "--target", "lambda"]);
    assert_eq!(code, 2);
    assert_eq!(report.unwrap()["verdict"]["verdict"], "refuted");

    let p = write(dir.path(), "affine.json", &affine());
    let (code, _, _) = run(&["check", p.to_str().unwrap(), "--target", "structure-scs"]);
    assert_eq!(code, 0);
}

#[test]
fn oracle_modes() {
    let (code, report, stdout) = run(&["oracle", "--size", "3", "--mode", "maps"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().count() > 1);
    assert_eq!(report.unwrap()["exit_code"], 0);

    let (code, _, _) = run(&["oracle", "--size", "1", "--mode", "maps", "--sequential"]);
    assert_eq!(code, 0);

    let (code, report, _) = run(&["oracle", "--size", "2", "--mode", "fw"]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(report["oracle"]["counterexamples"].as_array().map(Vec::len), Some(0));

    let (code, _, _) = run(&["oracle", "--size", "6", "--mode", "maps"]);
    assert_eq!(code, 1);
}

#[test]
fn batch_keeps_order_and_worst_code() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", &affine());
    let m = write(dir.path(), "m.json", &mod3());
    let out = bin().args(["batch", a.to_str().unwrap(), m.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["outcome"]["outcome"], "fixed_point");
    assert_eq!(lines[1]["outcome"]["outcome"], "fixed_set");
}

#[test]
fn version_and_usage() {
    let out = bin().arg("--version").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("limfix "));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
