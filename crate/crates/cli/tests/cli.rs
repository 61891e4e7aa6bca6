use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"{"n": 63, "m": 32, "taus": [0.1, 0.2], "uniqueness": {"T": 0.5}}"#;

fn fracsub(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracsub"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn summary(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("out/summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn evolve_exhibits_three_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["evolve"], Some(SMALL), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = summary(dir.path());
    let margins = s["margins"].as_object().unwrap();
    assert!(margins.values().all(|m| m["pass"] == true));
    let shifts: Vec<&String> = margins.keys().filter(|k| k.starts_with("evolve.shift_residual")).collect();
    assert_eq!(shifts.len(), 2);
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    let evolve = dir.path().join("out/evolve");
    let trajectories: Vec<PathBuf> = std::fs::read_dir(&evolve)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name == "trajectory.csv" || name.starts_with("shift_j")
        })
        .collect();
    assert_eq!(trajectories.len(), 3);
    let head = std::fs::read_to_string(&trajectories[0]).unwrap();
    assert!(head.starts_with("t,x,u\n"));
}

#[test]
fn every_chart_has_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["bump"], Some(SMALL), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stage = dir.path().join("out/bump");
    for entry in std::fs::read_dir(&stage).unwrap().flatten() {
        let p = entry.path();
        if p.extension().is_some_and(|e| e == "svg") {
            assert!(p.with_extension("csv").exists(), "{} has no CSV", p.display());
        }
    }
}

#[test]
fn wrong_regimes_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["evolve"], Some(r#"{"alpha": 1.5}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("uniqueness"));
    let out = fracsub(&["uniqueness"], Some(r#"{"alpha": 0.5}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["bump"], Some(r#"{"q_spec": {"q0": 0}}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("(Q2) requires q0 > 0"), "{}", stderr(&out));
    let out = fracsub(&["bump"], Some(r#"{"s": 0.5, "sigma": 1}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = fracsub(&["bump"], Some("{\"s\": 0.5,\n \"alpha\": ]"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let out = fracsub(&["bump"], Some(r#"{"bump": {"x0": 0.3, "R": 0.5}}"#), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn iteration_budget_exhaustion_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"n": 63, "tolerances": {"max_iterations": 2}}"#;
    let out = fracsub(&["stationary"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn failed_margin_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"n": 63, "tolerances": {"residual": 1e-30}}"#;
    let out = fracsub(&["stationary"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(4));
    let s = summary(dir.path());
    assert_eq!(s["margins"]["stationary.minimizer_residual"]["pass"], false);
}

#[test]
fn strict_mode_fails_on_warnings() {
    // at n = 512 the discrete slack uses more than half of its budget
    let cfg = r#"{"m": 32}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["evolve"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(!summary(dir.path())["warnings"].as_array().unwrap().is_empty());
    let out = fracsub(&["evolve", "--strict"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn matrix_dump_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["stationary", "--dump-matrix"], Some(r#"{"n": 15}"#), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("out/stationary/operator.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 15 * 15);
    let echoed = std::fs::read_to_string(dir.path().join("out/config.json")).unwrap();
    assert!(echoed.contains("\"T\": \"auto\""));
}

#[test]
fn specfun_suite_runs_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracsub(&["verify-specfun"], None, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = summary(dir.path());
    assert!(s["timings"]["specfun"].as_f64().unwrap() >= 0.0);
}
