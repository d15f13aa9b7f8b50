//! End-to-end runs of the `ptwg` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ptwg::sweep::CSV_HEADER;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn ptwg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptwg"))
        .args(args)
        .output()
        .expect("spawn ptwg")
}

fn run_to_file(cmd: &str, cfg: &Path, out: &Path) -> String {
    let o = ptwg(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn sweep_csv_is_bit_identical_across_runs_and_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("weak_coupling.toml");
    let a = run_to_file("sweep", &cfg, &dir.path().join("a.csv"));
    let b_path = dir.path().join("b.csv");
    let o = ptwg(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b_path.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(o.status.success());
    let b = std::fs::read_to_string(b_path).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER.join(",").as_str()));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.len(), 10);
        let re_fd: f64 = r[3].parse().unwrap();
        assert!(re_fd < 0.25, "eigenvalue below the threshold");
        assert_eq!(r[9], "0");
    }
}

#[test]
fn predict_reports_full_precision_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to_file("predict", &config("critical.toml"), &dir.path().join("p.json"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let preds = v.as_array().unwrap();
    assert_eq!(preds.len(), 2);
    assert_eq!(preds[0]["exists"], "Yes");
    assert_eq!(preds[0]["case_tag"], "th2.1-iii");
    assert!(preds[0]["tau"]["value"].as_f64().unwrap() > 0.0);
    // 17 significant digits
    assert!(text.contains("e-1") && text.lines().any(|l| l.contains("\"epsilon\": 4.0000000000000002e-1")));
}

#[test]
fn tau_and_modes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to_file("tau", &config("critical.toml"), &dir.path().join("t.json"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["regime"], "subcritical");
    assert_eq!(v["converged"], true);
    assert!(v["J"].as_u64().unwrap() >= 64);

    let csv = run_to_file("modes", &config("modes.toml"), &dir.path().join("m.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,mu,re_a,im_a"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn fd_absent_runs_a_scan() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_to_file("fd", &config("absent.toml"), &dir.path().join("f.json"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let scan = &v[0]["scan"];
    assert_eq!(scan["shifts"], 25);
    assert!(scan["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["class"] == "continuum-cluster"));
}

#[test]
fn validate_exit_code_tracks_failures() {
    let ok = ptwg(&["validate", "--criteria", "1,2"]);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("2/2 criteria passed"));
    let bad = ptwg(&["validate", "--criteria", "2", "--flip-boundary-sign"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]"));
}

#[test]
fn missing_config_is_an_error() {
    let o = ptwg(&["sweep"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ptwg(&["tau", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
}
