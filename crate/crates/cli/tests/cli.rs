//! End-to-end tests of the binary: exit codes, report schema, determinism.

use std::process::{Command, Output};

fn qsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsphere"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Zero every wall_ms field so byte comparison ignores timing.
fn normalize(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("valid report json");
    if let Some(checks) = v.get_mut("checks").and_then(|c| c.as_array_mut()) {
        for c in checks {
            if let Some(w) = c.get_mut("wall_ms") {
                *w = serde_json::json!(0);
            }
        }
    }
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn check_relations_passes_and_reports() {
    let out = qsphere(&["check-relations", "--n", "2", "--q", "0.5", "--N", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["passed"], true);
    let sum = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "q=0.5/sphere.sum_ystar_y")
        .expect("sphere unit check present");
    assert!(sum["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn check_sets_reports_zero_mismatches() {
    let out = qsphere(&["check-sets", "--n", "2", "--zmax", "2", "--xmax", "2", "--N", "2"]);
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mismatches=0"), "stderr: {stderr}");
}

#[test]
fn flag_errors_exit_2() {
    let out = qsphere(&["check-relations", "--q", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qsphere(&["check-qindep", "--n", "1", "--q", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qsphere(&["check-lemma", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_hermitian_spectrum_exits_1() {
    let out = qsphere(&["spectrum", "--n", "1", "--q", "0.5", "--N", "6", "--word", "Y2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not hermitian"));
}

#[test]
fn hermitian_spectrum_reports_eigenvalues() {
    let out = qsphere(&[
        "spectrum", "--n", "1", "--q", "0.5", "--N", "4", "--word", "Y1* Y1",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let eigs: Vec<f64> = doc["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // diag(q^{2k}) over the window plus 0 at the ∞ point
    assert_eq!(eigs.len(), 6);
    assert!((eigs[0] - 0.0).abs() < 1e-12);
    assert!((eigs[5] - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let args = [
        "check-theorem", "--n", "2", "--q", "0.5", "--L", "2", "--seed", "42",
    ];
    let a = qsphere(&args);
    let b = qsphere(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        normalize(&String::from_utf8_lossy(&a.stdout)),
        normalize(&String::from_utf8_lossy(&b.stdout))
    );
}

#[test]
fn matrix_export_is_bit_stable() {
    let args = [
        "represent", "--n", "1", "--q", "0.5", "--N", "2", "--theta", "0.25", "--phi", "0.75",
        "--word", "Y2",
    ];
    let a = qsphere(&args);
    let b = qsphere(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.starts_with("%%GroupoidMatrix n=1 N=2 theta=2.5"));
    // every data line is `row col re im` with 17 significant digits
    for line in text.lines().skip(1) {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 4, "bad line {line}");
        assert!(parts[2].contains('e') && parts[3].contains('e'));
    }
}

#[test]
fn report_matches_golden_schema() {
    let out = qsphere(&["check-sets", "--n", "2", "--zmax", "1", "--xmax", "1", "--N", "1"]);
    assert!(out.status.success());
    let got = normalize(&String::from_utf8_lossy(&out.stdout));
    let golden = include_str!("golden/check_sets_small.json");
    assert_eq!(got.trim(), golden.trim(), "golden report drifted");
}
