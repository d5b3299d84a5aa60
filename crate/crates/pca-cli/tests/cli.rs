// Drive the compiled binary end to end: argument handling, exit codes,
// and file outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn pca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pca-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_and_version_exit_cleanly() {
    let help = pca(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("simulate"));
    let version = pca(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let out = pca(&["sample", "--model", "notamodel", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown model"), "stderr: {err}");
}

#[test]
fn bad_flags_exit_one() {
    let out = pca(&["sample", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn timeout_dominated_runs_exit_two() {
    let out = pca(&[
        "sample", "--model", "majority", "--alpha", "0.5", "--n", "4", "--samples", "5",
        "--max-depth", "64", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("timeout"));
}

#[test]
fn simulate_writes_a_pgm() {
    let path = scratch("sim.pgm");
    let out = pca(&[
        "simulate", "--model", "stavskaya", "--alpha", "0.6", "--n", "16", "--steps", "15",
        "--seed", "7", "--init", "ones", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("P2\n16 16\n255\n"));
}

#[test]
fn exact_writes_the_stationary_csv() {
    let path = scratch("exact.csv");
    let out = pca(&[
        "exact", "--model", "noisy-xor", "--epsilon", "0.2", "--n", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("component,state,probability"));
    assert_eq!(text.lines().count(), 9, "8 states plus the header");
}

#[test]
fn duality_writes_the_report_csv() {
    let path = scratch("duality.csv");
    let out = pca(&[
        "duality", "--alpha", "0.5", "--t", "1", "--trials", "2000", "--seed", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() >= 2);
}

#[test]
fn check_prints_both_verdicts() {
    let out = pca(&["check", "--model", "noisy-xor", "--epsilon", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("finite"), "stdout: {text}");
    assert!(text.contains("infinite lattice:"), "stdout: {text}");
}
