use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pesinlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pesinlab"))
        .current_dir(dir)
        .args(args)
        .env("RAYON_NUM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn lyapunov_record_carries_config_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = pesinlab(dir.path(), &["lyapunov", "--system", "cat", "--steps", "10000", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&dir.path().join("runs.jsonl"));
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!(r["config"]["command"], "lyapunov");
    assert_eq!(r["config"]["seed"], 7);
    assert_eq!(r["config"]["params"]["steps"], 10000);
    assert_eq!(r["config"]["params"]["renorm"], 1);
    let ex = r["result"]["exponents"].as_array().unwrap();
    assert!((ex[0].as_f64().unwrap() - 0.9624236501192069).abs() < 1e-4);
    assert!((ex[1].as_f64().unwrap() + 0.9624236501192069).abs() < 1e-4);
    assert!(r["tool_version"].as_str().unwrap().starts_with("pesinlab "));
    assert!(r["started_at"].is_string() && r["finished_at"].is_string());
}

#[test]
fn identical_configs_give_identical_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["components", "--ensemble", "60", "--steps", "2000", "--seed", "11"];
    for threads in ["1", "3"] {
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        assert!(pesinlab(dir.path(), &a).status.success());
    }
    let recs = records(&dir.path().join("runs.jsonl"));
    assert_eq!(serde_json::to_string(&recs[0]["result"]).unwrap(), serde_json::to_string(&recs[1]["result"]).unwrap());
}

#[test]
fn periodic_export_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pesinlab(dir.path(), &["periodic", "--system", "cat", "--period", "2"]).status.success());
    let recs = records(&dir.path().join("runs.jsonl"));
    assert_eq!(recs[0]["result"].as_array().unwrap().len(), 5);
    let out = pesinlab(dir.path(), &["export", "--select", "periodic", "--format", "csv", "--out", "p.csv"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "num1,den1,num2,den2,period,hyperbolic");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "0,1,0,1,1,true");
    assert!(lines.contains(&"1,5,2,5,2,true"));
}

#[test]
fn spectrum_and_polyline_exports() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pesinlab(dir.path(), &["lyapunov", "--steps", "500"]).status.success());
    assert!(pesinlab(dir.path(), &["manifold", "--sign", "-"]).status.success());
    let out = pesinlab(dir.path(), &["export", "--select", "lyapunov"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("n,lambda1,lambda2\n500,"));
    let out = pesinlab(dir.path(), &["export", "--select", "manifold"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,x1,x2"));
    assert!(lines.count() > 100);
    // json-lines export reproduces the stored line
    let out = pesinlab(dir.path(), &["export", "--select", "manifold#0", "--format", "json-lines"]);
    let stored = std::fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), format!("{}\n", stored.lines().nth(1).unwrap()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pesinlab(dir.path(), &["lyapunov", "--steps", "100"]).status.success());
    // no match
    assert_eq!(pesinlab(dir.path(), &["export", "--select", ""]).status.code(), Some(3));
    assert_eq!(pesinlab(dir.path(), &["export", "--select", "periodic"]).status.code(), Some(3));
    // validation
    assert_eq!(pesinlab(dir.path(), &["lyapunov", "--system", "henon"]).status.code(), Some(2));
    assert_eq!(pesinlab(dir.path(), &["lyapunov", "--steps", "-3"]).status.code(), Some(2));
    assert_eq!(pesinlab(dir.path(), &["periodic", "--system", "cat_x_id"]).status.code(), Some(2));
    // computation failure names the error
    let out = pesinlab(dir.path(), &["oseledets", "--system", "cat_x_id", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NoConvergenceError"));
    // failed runs append nothing
    assert_eq!(records(&dir.path().join("runs.jsonl")).len(), 1);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "system = \"cat\"\nseed = 5\nsteps = 300\nout = \"cfg.jsonl\"\n").unwrap();
    let out = pesinlab(dir.path(), &["lyapunov", "--config", "c.toml", "--steps", "200"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &records(&dir.path().join("cfg.jsonl"))[0];
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["params"]["steps"], 200);

    std::fs::write(dir.path().join("bad.toml"), "stepz = 300\n").unwrap();
    assert_eq!(pesinlab(dir.path(), &["lyapunov", "--config", "bad.toml"]).status.code(), Some(2));
}

#[test]
fn ergodic_test_on_the_product_names_the_circle_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = pesinlab(
        dir.path(),
        &["ergodic-test", "--system", "cat_x_id", "--steps", "20000", "--ensemble", "20", "--seed", "1"],
    );
    assert!(out.status.success());
    let r = &records(&dir.path().join("runs.jsonl"))[0];
    assert_eq!(r["result"]["verdict"]["verdict"], "non-ergodic");
    assert_eq!(r["result"]["verdict"]["witness_freq"], serde_json::json!([0, 0, 1]));
}
