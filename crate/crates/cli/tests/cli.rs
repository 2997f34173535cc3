use conebook::config::{Command, Config};
use conebook::conventions;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_conebook"))
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_round_trip() {
    let all = configs();
    assert_eq!(all.len(), Command::ALL.len());
    for p in all {
        let cfg = Config::parse(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(Config::parse(&cfg.serialize()).unwrap(), cfg, "{}", p.display());
        let stem = p.file_stem().unwrap().to_str().unwrap();
        assert!(stem.parse::<Command>().is_ok(), "config {stem} names no command");
    }
}

#[test]
fn conventions_listing_matches_snapshot() {
    let snapshot = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots/conventions.txt");
    let expected = fs::read_to_string(snapshot).unwrap();
    assert_eq!(conventions::listing(), expected);
    let out = bin().arg("--list-conventions").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn reach_right_angle_has_unit_radius() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("r");
    let status = bin()
        .args(["reach", "--set", "t=1", "--set", "theta=1.5707963267948966", "--set", "n=1000", "--out"])
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "radius").unwrap();
    assert!((row[col].parse::<f64>().unwrap() - 1.0).abs() < 1e-15);
    for ext in ["json", "svg", "config"] {
        assert!(dir.path().join(format!("r.{ext}")).exists(), "missing r.{ext}");
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["seed"], 0);
    assert_eq!(json["metadata"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["error"].is_null());
}

#[test]
fn config_echo_is_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("q");
    assert!(bin().args(["qstats", "--seed", "9", "--out"]).arg(&prefix).status().unwrap().success());
    let echo = fs::read_to_string(dir.path().join("q.config")).unwrap();
    let cfg = Config::parse(&echo).unwrap();
    assert_eq!(cfg.get_raw("seed"), Some("9"));
    assert_eq!(cfg.resolve().echo(Command::Qstats), echo);
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e");
    let run = |args: &[&str]| bin().args(args).arg("--out").arg(&p).status().unwrap().code();

    assert_eq!(run(&["reach", "--set", "not.a.key=1"]), Some(2));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(json["error"]["kind"], "InvalidInput");
    assert_eq!(run(&["reach", "--set", "theta=4"]), Some(2));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(json["error"]["kind"], "AngleOutOfRange");
    assert_eq!(run(&["nonsense"]), Some(2));

    // a return time above the cap is a numerical failure
    assert_eq!(run(&["calabi", "--set", "section.kind=perturbed_flow", "--set", "calabi.tau_cap=1", "--set", "calabi.n_max=1"]), Some(3));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(json["error"]["kind"], "NonIntegrableTau");
    assert_eq!(json["error"]["exit_status"], 3);
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["qstats", "--config", "/nonexistent/conebook.conf", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_rejected() {
    let status = bin().env("CONEBOOK_THREADS", "zero").args(["qstats", "--out", "/tmp/conebook-threads"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
