mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use oos_core::cli::*;
use oos_core::{Error, NetworkCase};

fn manifest(name: &str) -> PathBuf {
    cases_dir().join(format!("{name}.manifest.json"))
}

fn oos(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_oos")).args(args).output().expect("spawn oos")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn manifest_paths_resolve_against_its_directory() {
    let m = RunManifest::load(manifest("mode2")).unwrap();
    assert!(m.case.ends_with("ieee39.json") && m.case.exists());
    assert_eq!(m.seed, Some(7));
    assert_eq!(m.figures, Figure::ALL.to_vec());
    let inp = RunInputs::from_manifest(&manifest("mode2")).unwrap();
    assert_eq!(inp.name, "mode2");
    assert_eq!(inp.suite.unwrap().s_gens, vec![33, 34, 35, 36]);
}

#[test]
fn manifest_with_missing_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.manifest.json");
    std::fs::write(&p, r#"{"case": "nope.json", "scenario": "nope.json"}"#).unwrap();
    assert!(matches!(RunManifest::load(&p), Err(Error::InvalidManifest(_))));
}

#[test]
fn manifest_with_non_separating_cutset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(manifest("mode2")).unwrap()).unwrap();
    v["case"] = serde_json::json!(arg(&cases_dir().join("ieee39.json")));
    v["scenario"] = serde_json::json!(arg(&cases_dir().join("mode2.json")));
    v["suite"]["cutsets"][0]["lines"] = serde_json::json!([[16, 17]]);
    let p = dir.path().join("x.manifest.json");
    std::fs::write(&p, v.to_string()).unwrap();
    assert!(matches!(RunInputs::from_manifest(&p), Err(Error::InvalidManifest(_))));
}

#[test]
fn case_json_round_trip_is_idempotent() {
    let case = ieee39();
    let text = case.to_json();
    let back = NetworkCase::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.hash(), case.hash());
}

#[test]
fn detect_reports_are_byte_identical_and_figures_are_written() {
    let inp = RunInputs::from_manifest(&manifest("mode2")).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_detect(&inp, None, a.path()).unwrap();
    cmd_detect(&inp, None, b.path()).unwrap();
    let ra = std::fs::read(a.path().join(REPORT_FILE)).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join(REPORT_FILE)).unwrap());
    for f in ["power_angle_C4.csv", "power_time_C4.csv", "energy_C4.csv", "compensation_C4.csv", "lpe.csv"] {
        let p = a.path().join(f);
        assert!(p.exists(), "{f} missing");
        assert!(std::fs::read_to_string(&p).unwrap().lines().count() > 100, "{f} nearly empty");
    }
}

#[test]
fn detect_from_saved_trajectory_matches_fresh_run() {
    let inp = RunInputs::from_manifest(&manifest("mode2")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cmd_simulate(&inp, dir.path()).unwrap();
    let saved = cmd_detect(&inp, Some(&dir.path().join(TRAJECTORY_FILE)), &dir.path().join("a")).unwrap();
    let fresh = cmd_detect(&inp, None, &dir.path().join("b")).unwrap();
    assert_eq!(saved.verdict, fresh.verdict);
    assert_eq!(saved.events.len(), fresh.events.len());
    for (x, y) in saved.events.iter().zip(&fresh.events) {
        assert_eq!((x.cutset.as_str(), x.detector), (y.cutset.as_str(), y.detector));
        assert!((x.t - y.t).abs() < 1e-9);
    }
}

#[test]
fn trajectory_from_another_case_is_rejected() {
    let mut inp = RunInputs::from_manifest(&manifest("mode2")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cmd_simulate(&inp, dir.path()).unwrap();
    inp.case.buses[0].gs += 0.01;
    let r = read_trajectory(&dir.path().join(TRAJECTORY_FILE), &inp);
    assert!(matches!(r, Err(Error::CaseHashMismatch { .. })), "{r:?}");
}

#[test]
fn binary_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let stable = oos(&["detect", "--manifest", arg(&manifest("mode1_stable")), "--out", arg(&dir.path().join("s"))]);
    assert_eq!(stable.status.code(), Some(0), "{}", String::from_utf8_lossy(&stable.stderr));
    let unstable = oos(&["detect", "--manifest", arg(&manifest("mode2")), "--out", arg(&dir.path().join("u"))]);
    assert_eq!(unstable.status.code(), Some(2), "{}", String::from_utf8_lossy(&unstable.stderr));
    let both = oos(&[
        "detect",
        "--manifest",
        arg(&manifest("mode1_stable")),
        "--manifest",
        arg(&manifest("mode2")),
        "--out",
        arg(&dir.path().join("b")),
    ]);
    assert_eq!(both.status.code(), Some(2));
    assert!(dir.path().join("b/mode2").join(REPORT_FILE).exists());
    assert!(dir.path().join("b/mode1_stable").join(REPORT_FILE).exists());
    let missing = oos(&["detect", "--case", "/nonexistent.json", "--scenario", "/nonexistent.json"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn analyze_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = arg(dir.path());
    let a = oos(&["analyze", "--manifest", arg(&manifest("mode2")), "--out", out]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let analysis: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(ANALYSIS_FILE)).unwrap()).unwrap();
    assert!(analysis["reduction_check"].as_f64().unwrap() < 1e-8);
    let d = oos(&["detect", "--manifest", arg(&manifest("mode2")), "--out", out]);
    assert_eq!(d.status.code(), Some(2));
    let r = oos(&["report", "--out", out]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("C4") && text.contains("C5"), "{text}");
    assert!(dir.path().join(SUMMARY_FILE).exists());
}
