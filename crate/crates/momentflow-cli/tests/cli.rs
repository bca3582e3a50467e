use std::fs;
use std::path::Path;
use std::process::Command;

use momentflow::harness::{csv_tables, ExperimentKind};

fn momentflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_momentflow")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn fsp_json_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sites": 32, "ells": [3]}"#);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let first = momentflow(&["fsp", "--config", &cfg, "--out", out, "--seed", "3"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let a = fs::read(Path::new(out).join("fsp.json")).unwrap();
    let second = momentflow(&["fsp", "--config", &cfg, "--out", out, "--seed", "3"]);
    assert!(second.status.success());
    let b = fs::read(Path::new(out).join("fsp.json")).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["sites"], 32);
    assert!(v["runtime"].is_null());
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "value", "target", "tol", "pass"] {
            assert!(c.get(key).is_some(), "check lacks {key}");
        }
    }
}

#[test]
fn csv_headers_match_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sites": 32, "ells": [3]}"#);
    let out = dir.path().join("out");
    let status = momentflow(&["fsp", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "csv"]);
    assert!(status.status.success());
    let checks = fs::read_to_string(out.join("fsp_checks.csv")).unwrap();
    assert_eq!(checks.lines().next(), Some("name,value,target,tol,pass"));
    for (table, cols) in csv_tables(ExperimentKind::Fsp) {
        let body = fs::read_to_string(out.join(format!("fsp_{table}.csv"))).unwrap();
        assert_eq!(body.lines().next(), Some(*cols));
        let width = cols.split(',').count();
        assert!(body.lines().all(|l| l.split(',').count() == width));
    }
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A threshold no propagator entry can meet.
    let cfg = write_config(dir.path(), r#"{"sites": 16, "ells": [2], "fsp-threshold": -1.0}"#);
    let out = momentflow(&["fsp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL fsp-tail"));
}

#[test]
fn invalid_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"kind": "mixing"}"#);
    let out = momentflow(&["fsp", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn help_lists_csv_columns() {
    let out = momentflow(&["mixing", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("poincare: ell,constant,ratio"));
    assert!(text.contains("checks: name,value,target,tol,pass"));
}

#[test]
fn print_config_echoes_defaults() {
    let out = momentflow(&["operator-suite", "--print-config", "--seed", "11"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "operator-suite");
    assert_eq!(v["seed"], 11);
}
