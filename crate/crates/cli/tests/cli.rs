use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_betapoly"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn betapoly")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn golden() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/schemas.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn golden_keys(name: &str) -> BTreeSet<String> {
    golden()[name]
        .as_array()
        .unwrap_or_else(|| panic!("no golden entry {name}"))
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect()
}

fn golden_header(name: &str) -> String {
    golden()[name].as_str().unwrap().to_string()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().expect("object").keys().cloned().collect()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

/// First stderr line must be the JSON error record.
fn error_record(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr
        .lines()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error line in {stderr}"));
    serde_json::from_str(line).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constants_schema_and_values() {
    let v = stdout_json(&run(&[
        "constants", "--objective", "perimeter", "--n", "3", "--beta", "0", "--json",
    ]));
    assert_eq!(keys(&v), golden_keys("constants"));
    assert_eq!(v["C"].as_f64().unwrap(), 4.0);
    assert_eq!(v["A"].as_f64().unwrap(), 0.75);
    assert!((v["M"].as_f64().unwrap() - 27f64.sqrt()).abs() < 1e-14);
}

#[test]
fn constants_plain_text() {
    let out = run(&["constants", "--objective", "area", "--n", "4", "--beta", "-0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    assert_eq!(names, ["M", "A", "B", "C", "K_n", "I"]);
}

#[test]
fn verify_schema() {
    let v = stdout_json(&run(&["verify", "--kernel", "area", "--n", "5", "--json"]));
    assert_eq!(keys(&v), golden_keys("verify"));
    assert_eq!(v["radial_partials"].as_array().unwrap().len(), 5);
    assert_eq!(v["analytic_partials"].as_array().unwrap().len(), 5);
    assert!(v["A6_pass"].as_bool().unwrap());
    assert!(v["A7_pass"].as_bool().unwrap());
    assert!(v["gradient_residual"].as_f64().unwrap() < 1e-6);
    let det = v["det_negG"].as_f64().unwrap();
    let analytic = v["analytic_det"].as_f64().unwrap();
    assert!(((det - analytic) / analytic).abs() < 1e-4);
}

#[test]
fn verify_custom_step() {
    let v = stdout_json(&run(&[
        "verify", "--kernel", "perimeter", "--n", "3", "--step", "1e-4", "--richardson", "--json",
    ]));
    assert!(v["gradient_residual"].as_f64().unwrap() < 1e-8);
    let out = run(&["verify", "--kernel", "perimeter", "--n", "3", "--step", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_then_umax_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let out = run(&["sample", "--beta", "0", "--count", "10", "--seed", "5", "--out", path_str(&pts)]);
    assert!(out.status.success());
    assert_eq!(first_line(&pts), golden_header("points.csv"));
    assert_eq!(fs::read_to_string(&pts).unwrap().lines().count(), 11);

    for objective in ["area", "perimeter"] {
        for n in ["3", "4"] {
            let fast = stdout_json(&run(&[
                "umax", "--in", path_str(&pts), "--n", n, "--objective", objective,
            ]));
            let slow = stdout_json(&run(&[
                "umax", "--in", path_str(&pts), "--n", n, "--objective", objective, "--brute-force",
            ]));
            assert_eq!(keys(&fast), golden_keys("umax"));
            let (a, b) = (fast["value"].as_f64().unwrap(), slow["value"].as_f64().unwrap());
            assert!((a - b).abs() <= 1e-9 * b.abs(), "{objective} n={n}: {a} vs {b}");
            assert_eq!(fast["vertex_indices"], slow["vertex_indices"]);
        }
    }
}

#[test]
fn sample_is_reproducible_and_streams_to_stdout() {
    let a = run(&["sample", "--beta", "1.5", "--count", "50", "--seed", "11", "--out", "-"]);
    let b = run(&["sample", "--beta", "1.5", "--count", "50", "--seed", "11", "--out", "-"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["sample", "--beta", "1.5", "--count", "50", "--seed", "12", "--out", "-"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_outputs_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let mut trials = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = run(&[
            "simulate", "--objective", "perimeter", "--n", "3", "--beta", "0", "--N", "20,40",
            "--trials", "150", "--seed", "3", "--out-dir", path_str(&out_dir), "--threads", threads,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(first_line(&out_dir.join("trials.csv")), golden_header("trials.csv"));
        assert_eq!(first_line(&out_dir.join("ecdf.csv")), golden_header("ecdf.csv"));
        let summary: Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(keys(&summary), golden_keys("summary"));
        assert_eq!(keys(&summary["law"]), golden_keys("summary.law"));
        assert_eq!(keys(&summary["per_size"][0]), golden_keys("summary.per_size"));
        assert_eq!(keys(&summary["consistency"]), golden_keys("summary.consistency"));
        assert_eq!(summary["per_size"].as_array().unwrap().len(), 2);
        // ecdf.csv covers the largest N only
        assert_eq!(fs::read_to_string(out_dir.join("ecdf.csv")).unwrap().lines().count(), 151);
        trials.push(fs::read(out_dir.join("trials.csv")).unwrap());
    }
    assert_eq!(trials[0], trials[1]);
    let text = String::from_utf8(trials.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 301);
    // micros stays empty without --timing
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn simulate_timing_fills_micros() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate", "--objective", "area", "--n", "3", "--beta", "1", "--N", "10", "--trials", "5",
        "--seed", "1", "--out-dir", path_str(dir.path()), "--timing",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    for line in text.lines().skip(1) {
        let micros = line.rsplit(',').next().unwrap();
        assert!(micros.parse::<u64>().is_ok(), "{line}");
    }
}

#[test]
fn tailprobe_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "tailprobe", "--objective", "perimeter", "--n", "3", "--beta", "0", "--eps", "0.4,0.5",
        "--draws", "20000", "--seed", "2", "--out-dir", path_str(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("tail.csv")), golden_header("tail.csv"));
    let summary: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("tail_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(keys(&summary), golden_keys("tail_summary"));
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn tailprobe_with_too_few_draws_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "tailprobe", "--objective", "perimeter", "--n", "3", "--beta", "0", "--eps", "0.2",
        "--draws", "10", "--seed", "2", "--out-dir", path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "runtime");
}

#[test]
fn missing_flag_names_it() {
    let out = run(&["constants", "--objective", "perimeter", "--beta", "0", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_record(&out);
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("--n"));

    let out = run(&["umax", "--in", "x.csv", "--objective", "area"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_record(&out)["message"].as_str().unwrap().contains("--n"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "{stderr}");
    assert_eq!(error_record(&out)["error"], "validation");
}

#[test]
fn invalid_values_are_validation_errors() {
    for args in [
        &["constants", "--objective", "area", "--n", "3", "--beta", "-1"][..],
        &["constants", "--objective", "area", "--n", "2", "--beta", "0"][..],
        &["constants", "--objective", "hexagon", "--n", "3", "--beta", "0"][..],
        &["sample", "--beta", "0", "--count", "0", "--seed", "1", "--out", "-"][..],
        &["constants", "--objective", "area", "--n", "3", "--beta", "0", "--threads", "0"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(serde_json::from_str::<Value>(stderr.lines().next().unwrap()).is_ok());
    }
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run(&[
        "simulate", "--objective", "perimeter", "--n", "3", "--beta", "0", "--N", "10",
        "--trials", "2", "--seed", "1", "--out-dir", path_str(&blocker.join("sub")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"objective": "perimeter", "n": 4, "beta": 1.0, "json": true}"#).unwrap();
    let from_file = stdout_json(&run(&["constants", "--config", path_str(&cfg)]));
    assert_eq!(from_file["C"].as_f64().unwrap(), 4.0 * 2.5 - 0.5);
    let flagged = stdout_json(&run(&["constants", "--config", path_str(&cfg), "--n", "3"]));
    assert_eq!(flagged["C"].as_f64().unwrap(), 3.0 * 2.5 - 0.5);

    fs::write(&cfg, r#"{"objective": "perimeter", "bogus": 1}"#).unwrap();
    let out = run(&["constants", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
}
