use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ermgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ermgap")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_wall_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_secs");
    v
}

#[test]
fn nonsmooth_run_matches_coverage_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = ermgap(&[
        "run",
        "--family",
        "nonsmooth-l2",
        "--d",
        "120",
        "--m",
        "1024",
        "--n",
        "9",
        "--trials",
        "200",
        "--seed",
        "7",
        "--gap",
        "0.25",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&json);
    let freq = report["success_frequency"].as_f64().unwrap();
    assert!((freq - 0.8649).abs() <= 0.10, "{freq}");
    assert_eq!(report["trials"].as_array().unwrap().len(), 200);
    assert_eq!(report["seeds"]["master"], 7);
    let csv = std::fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("trial_index,seed,gap,succeeded,verified\n"));
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn code_run_always_succeeds() {
    let out = ermgap(&[
        "run", "--family", "code", "--code", "127-64", "--n", "32", "--trials", "20", "--gap", "0.0196", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("success frequency 1.0000 (20/20)"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&ermgap(&["run", "--family", "nonsmooth-l2", "--n", "0", "--seed", "1"])), 2);
    assert_eq!(code(&ermgap(&["run", "--family", "nope", "--n", "3"])), 2);
    assert_eq!(code(&ermgap(&["run", "--family", "lp", "--n", "3", "--seed", "1"])), 2);
    assert_eq!(code(&ermgap(&["run", "--family", "l1reg", "--lambda", "5", "--n", "3", "--seed", "1"])), 2);
    assert_eq!(code(&ermgap(&["run", "--family", "scaled", "--eps", "2", "--n", "3", "--seed", "1"])), 2);
    assert_eq!(code(&ermgap(&["bogus"])), 2);
    let out = ermgap(&["run", "--family", "smooth", "--n", "3", "--trials", "0", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
}

#[test]
fn missed_theorem_check_exits_one() {
    // no trial can reach a gap above 1/4
    let out = ermgap(&[
        "run",
        "--family",
        "nonsmooth-l2",
        "--d",
        "60",
        "--m",
        "256",
        "--n",
        "4",
        "--trials",
        "40",
        "--seed",
        "2",
        "--gap",
        "0.3",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn embedded_invocation_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = ermgap(&[
        "run",
        "--family",
        "bounded-range",
        "--m",
        "64",
        "--n",
        "5",
        "--trials",
        "50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let seed: u64 = stderr.lines().find_map(|l| l.strip_prefix("seed: ")).unwrap().trim().parse().unwrap();
    let first = read_json(&path);
    assert_eq!(first["seeds"]["master"].as_u64(), Some(seed));
    let invocation: Vec<String> =
        first["invocation"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(invocation[0], "ermgap");
    assert_eq!(&invocation[invocation.len() - 2..], ["--seed".to_string(), seed.to_string()]);

    let args: Vec<&str> = invocation[1..].iter().map(String::as_str).collect();
    assert_eq!(code(&ermgap(&args)), 0);
    let second = read_json(&path);
    assert_eq!(without_wall_time(first), without_wall_time(second));
}

#[test]
fn parallel_flag_does_not_change_trials() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["run", "--family", "smooth", "--d", "60", "--m", "256", "--n", "7", "--trials", "40", "--seed", "5"];
    let mut args_a = base.to_vec();
    args_a.extend(["--out", a.to_str().unwrap()]);
    let mut args_b = base.to_vec();
    args_b.extend(["--parallel", "4", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&ermgap(&args_a)), 0);
    assert_eq!(code(&ermgap(&args_b)), 0);
    assert_eq!(read_json(&a)["trials"], read_json(&b)["trials"]);
}

#[test]
fn other_modes_run() {
    let out = ermgap(&[
        "run",
        "--family",
        "nonsmooth-l2",
        "--d",
        "60",
        "--m",
        "1024",
        "--n",
        "64",
        "--trials",
        "10",
        "--seed",
        "1",
        "--mode",
        "uniform-deviation",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = ermgap(&[
        "run",
        "--family",
        "smooth",
        "--d",
        "60",
        "--m",
        "256",
        "--n",
        "200",
        "--trials",
        "5",
        "--seed",
        "1",
        "--mode",
        "sgd-contrast",
    ]);
    assert_eq!(code(&out), 0);
    let out = ermgap(&["run", "--family", "bounded-range", "--n", "5", "--seed", "1", "--mode", "sgd-contrast"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_suites_pass() {
    for args in [
        vec!["verify", "--family", "smooth", "--seed", "3", "--d", "60", "--m", "256"],
        vec!["verify", "--family", "bounded-range", "--m", "64"],
        vec!["verify", "--family", "code", "--code", "15-7"],
        vec!["verify", "--family", "l1reg", "--d", "60", "--m", "256", "--cases", "500"],
        vec!["verify", "--family", "lp", "--p", "inf", "--d", "60", "--m", "256", "--cases", "500"],
    ] {
        let out = ermgap(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    }
}

#[test]
fn pack_writes_a_valid_packing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("packing.json");
    let out = ermgap(&["pack", "--d", "48", "--m", "64", "--seed", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&path);
    assert_eq!(v["d"], 48);
    assert_eq!(v["vectors"].as_array().unwrap().len(), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("valid=true"));
    // log2 m > d/6 is rejected up front
    assert_eq!(code(&ermgap(&["pack", "--d", "12", "--m", "64", "--seed", "4"])), 2);
}

#[test]
fn codes_prints_parameters() {
    let out = ermgap(&["codes", "--code", "127-64"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((v["d"].as_u64(), v["k"].as_u64(), v["r"].as_u64()), (Some(127), Some(64), Some(10)));
}
