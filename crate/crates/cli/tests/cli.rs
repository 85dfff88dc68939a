// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn quvis(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quvis"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_golden_reports_every_gate() {
    let dir = tempfile::tempdir().unwrap();
    let out = quvis(dir.path(), &["verify-golden"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 9);
    let v = json(&dir.path().join("verify_golden.json"));
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    // two stored tables replay slightly above the default budget
    let over = rows.iter().filter(|r| r[3].as_f64().unwrap() > 5e-2).count();
    assert_eq!(out.status.code(), Some(if over == 0 { 0 } else { 3 }));
    // a looser budget passes cleanly
    let out = quvis(dir.path(), &["verify-golden", "--budget", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("verify_golden.meta.json").exists());
}

#[test]
fn zero_schedule_on_free_qubit_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("zero.csv");
    std::fs::write(&table, "T=0.3,K=3,N=1\nx1,y1\n0,0\n0,0\n0,0\n").unwrap();
    let out = quvis(dir.path(), &["evolve", "--schedule", table.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("evolve.json"));
    assert_eq!(v["error"].as_f64(), Some(0.0));
    assert_eq!(v["n_slices"].as_u64(), Some(3));
}

#[test]
fn config_errors_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[optimizer]\nlearning_rate = \"fast\"\n").unwrap();
    let out = quvis(dir.path(), &["--config", cfg.to_str().unwrap(), "verify-golden"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let record: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(record["error"]["kind"], "config");
    assert_eq!(record["error"]["line"], 2);
}

#[test]
fn module_errors_become_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = quvis(dir.path(), &["compile", "--n", "12"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let record: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(record["error"]["kind"], "out_of_range");
}

#[test]
fn compile_and_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["3", "4", "5", "6"] {
        let out = quvis(dir.path(), &["compile", "--n", n, "--set", "quvis3"]);
        assert!(out.status.success());
    }
    let v = json(&dir.path().join("compile_quvis3_n6.json"));
    assert!((v["circuit"]["total_time"].as_f64().unwrap() - 16.1).abs() < 1e-9);
    assert!(v["exact_distance"].as_f64().unwrap() < 1e-9);
    assert!(v["circuit"]["predicted_error"].as_f64().unwrap() > 0.0);

    let points = dir.path().join("points.csv");
    std::fs::write(&points, "n,t\n3,2.1\n4,5.6\n5,10.1\n6,16.1\n").unwrap();
    let out = quvis(
        dir.path(),
        &["fit", points.to_str().unwrap(), "--x", "n", "--y", "t", "--min-x", "5"],
    );
    assert!(out.status.success());
    let f = json(&dir.path().join("fit.json"));
    assert!((f["gamma"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    assert_eq!(f["n_points"].as_u64(), Some(2));
}

#[test]
fn synthesis_finds_fast_controlled_phase() {
    let dir = tempfile::tempdir().unwrap();
    let out = quvis(
        dir.path(),
        &["synthesize", "--target", "cp:pi/2", "--time", "0.45", "--restarts", "5"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("synthesize.json"));
    assert!(v["successes"].as_u64().unwrap() >= 1);
    assert_eq!(v["runs"].as_array().unwrap().len(), 5);
    // the stored pulses reproduce the reported error
    let pulses = dir.path().join("synthesize.pulses.csv");
    let out = quvis(
        dir.path(),
        &["evolve", "--schedule", pulses.to_str().unwrap(), "--target", "cp:pi/2"],
    );
    assert!(out.status.success());
    let e = json(&dir.path().join("evolve.json"));
    let diff = e["error"].as_f64().unwrap() - v["best"]["final_error"].as_f64().unwrap();
    assert!(diff.abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["bench", "qft", "--max-n", "4", "--set", "quvis3,quvis2", "--seed", "7"];
    assert!(quvis(a.path(), &args).status.success());
    let single: Vec<&str> = ["--jobs", "1"].into_iter().chain(args).collect();
    assert!(quvis(b.path(), &single).status.success());
    for f in ["qft.json", "qft.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
