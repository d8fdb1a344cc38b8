use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn quadham(args: &[&str], out: &Path) -> (Output, Value) {
    let output = Command::new(env!("CARGO_BIN_EXE_quadham"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&output.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&output.stdout)));
    (output, report)
}

fn run(args: &[&str]) -> (i32, Value, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let (output, report) = quadham(args, dir.path());
    (output.status.code().unwrap(), report, dir)
}

#[test]
fn simulate_oscillator_writes_trajectory() {
    let m = model("oscillator.json");
    let (code, report, dir) = run(&["simulate", "--model", m.to_str().unwrap(), "--initial", "0,1,0", "--t-end", "1", "--step", "1e-3"]);
    assert_eq!(code, 0);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["status"], "pass");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,q1,p1"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[1] - 0.540302).abs() < 1e-6, "q(1) = {}", last[1]);
    assert_eq!(csv.lines().count(), 1002);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn kt_on_coupled_model() {
    let m = model("coupled.json");
    let (code, report, _dir) = run(&["kt", "--model", m.to_str().unwrap(), "--K", "4", "--D", "2"]);
    assert_eq!(code, 0);
    // functions of the single free momentum combination, degree <= 2
    assert_eq!(report["h_dim"]["0"], 3);
    assert_eq!(report["h_dim"]["1"], 0);
    assert_eq!(report["nilpotency"]["passed"], true);
    assert_eq!(report["homology"][1]["complete"], true);
    assert_eq!(report["differential"]["c[1,2]"], "(1/2)*c[1,1]^1 + (1/2)*c[2,1]^1");
}

#[test]
fn validate_reports_rank_jump() {
    let m = model("rank_varying.json");
    let (code, report, _dir) = run(&["validate", "--model", m.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(report["status"], "fail");
    assert_eq!(report["error"]["kind"], "constant-rank-violation");

    let ok = model("coupled.json");
    let (code, report, _dir) = run(&["validate", "--model", ok.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["validation"]["rank"], 1);
}

#[test]
fn usage_errors_exit_two_with_json() {
    let (code, report, _dir) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "usage");

    let m = model("coupled.json");
    let (code, report, _dir) = run(&["simulate", "--model", m.to_str().unwrap(), "--step", "0"]);
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "invalid-input");

    let (code, report, _dir) = run(&["kt"]);
    assert_eq!(code, 2);
    assert_eq!(report["status"], "error");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"m": 2, "a": [[[], []]], "b": [], "c": []}"#).unwrap();
    let (code, report, _out) = run(&["split", "--model", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(report["status"], "error");
    let saved = std::fs::read_to_string(_out.path().join("report.json")).unwrap();
    assert!(saved.contains("\"error\""));

    let (code, report, _dir) = run(&["simulate", "--model", m.to_str().unwrap(), "--sigma1", "1,0;0,0"]);
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "invalid-sigma");
}

#[test]
fn help_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_quadham")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lagrange-check"));
}

#[test]
fn classify_user_and_primary_sets() {
    let m = model("second_class.json");
    let (code, report, _dir) = run(&["classify", "--model", m.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["classes"], serde_json::json!(["second", "second"]));
    assert_eq!(report["vanishes_on_constraint_space"], serde_json::json!([true, false]));

    let m = model("diagonal_potential.json");
    let (_, report, _dir) = run(&["classify", "--model", m.to_str().unwrap()]);
    assert_eq!(report["source"], "primary");
    assert_eq!(report["classes"], serde_json::json!(["first"]));
    assert_eq!(report["algorithm"]["chain"], serde_json::json!([["p2"], ["p2", "q2"]]));
    assert_eq!(report["algorithm"]["closed"], true);
}

#[test]
fn brst_charge_report() {
    let m = model("diagonal.json");
    let (code, report, _dir) = run(&["brst", "--model", m.to_str().unwrap(), "--K", "1"]);
    assert_eq!(code, 0);
    assert_eq!(report["charge"], "p2*cb[2,1]^1");
    let (code, report, _dir) = run(&["brst", "--model", m.to_str().unwrap(), "--K", "4", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(report["bracket_matches_differential"]["passed"], true);
    assert_eq!(report["seed"], 9);
}

#[test]
fn lagrange_check_passes_on_constraint_space() {
    let m = model("diagonal.json");
    let args = ["lagrange-check", "--model", m.to_str().unwrap(), "--initial", "0,0,0,1,0", "--sigma1", "0,0;0,1", "--upsilon", "0,1"];
    let (code, report, _dir) = run(&args);
    assert_eq!(code, 0, "{report:#}");
    for key in ["lagrange", "gauge", "momentum", "constrained_equations", "constraint_drift"] {
        assert_eq!(report["checks"][key]["passed"], true, "{key}");
    }
}

#[test]
fn lagrange_check_fails_off_constraint_space() {
    let m = model("diagonal.json");
    let args = ["lagrange-check", "--model", m.to_str().unwrap(), "--initial", "0,0,0,1,1", "--sigma1", "0,0;0,1"];
    let (code, report, _dir) = run(&args);
    assert_eq!(code, 1);
    assert_eq!(report["checks"]["constraint_drift"]["skipped"], "initial state is off the constraint space");
    assert_eq!(report["checks"]["gauge"]["passed"], false);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let m = model("coupled.json");
    for args in [
        vec!["kt", "--model", m.to_str().unwrap(), "--seed", "42"],
        vec!["brst", "--model", m.to_str().unwrap(), "--seed", "42"],
        vec!["simulate", "--model", m.to_str().unwrap(), "--initial", "0,0,0,1,1", "--t-end", "2"],
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (oa, _) = quadham(&args, a.path());
        let (ob, _) = quadham(&args, b.path());
        assert_eq!(oa.stdout, ob.stdout);
        let ra = std::fs::read(a.path().join("report.json")).unwrap();
        assert_eq!(ra, std::fs::read(b.path().join("report.json")).unwrap());
    }
}
