//! End-to-end CLI behavior: exit codes, file handling, and the
//! produce-then-verify loop.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-forms"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("padic-forms-test-{}-{name}", std::process::id()));
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_exit_codes() {
    // soluble -> 0
    let out = run(&["solve", "--p", "2", "--form", "x1^2 - 17*x2^2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("soluble"));
    // insoluble -> 0 (certified)
    let out = run(&["solve", "--p", "2", "--form", "x1^2 + x2^2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("insoluble"));
    // unknown -> 2 (singular square, never liftable, never refutable)
    let out = run(&[
        "solve",
        "--p",
        "3",
        "--form",
        "x1^2 - 2*x1*x2 + x2^2",
        "--level-max",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // usage / parse errors -> 1
    let out = run(&["solve", "--p", "4", "--form", "x1^2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["solve", "--p", "3", "--form", "x1^2 + x2^3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["solve", "--p", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn builtin_forms_are_available() {
    let out = run(&["solve", "--p", "2", "--builtin", "terjanian-F"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("insoluble"));
    let out = run(&["solve", "--p", "3", "--builtin", "quartic-H(1,0,1,0,0,1)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("soluble"));
    let out = run(&["solve", "--p", "3", "--builtin", "no-such-form"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn certificates_verify_and_tampering_is_caught() {
    let cert = tmp("soluble.json");
    let out = run(&[
        "solve",
        "--p",
        "7",
        "--form",
        "x1^2 + x2^2 + x3^2",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--file", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("certificate verified"));

    // tamper with the vector: verification must reject it
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["vector"][0] = serde_json::Value::String("12345".to_string());
    let bad = tmp("tampered.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    let out = run(&["verify", "--file", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("REJECTED"));
    std::fs::remove_file(&cert).ok();
    std::fs::remove_file(&bad).ok();
}

#[test]
fn insoluble_certificates_verify_both_methods() {
    // split-convolution (diagonal form)
    let split = tmp("insol-split.json");
    let out = run(&[
        "diagonal",
        "--p",
        "2",
        "--d",
        "4",
        "--coeffs",
        "1,1,1,1,1",
        "--out",
        split.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--file", split.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    // direct enumeration (connected binary form)
    let direct = tmp("insol-direct.json");
    let out = run(&[
        "solve",
        "--p",
        "3",
        "--form",
        "x1^2 + x1*x2 + x2^2",
        "--out",
        direct.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let body = std::fs::read_to_string(&direct).unwrap();
    assert!(body.contains("direct-enumeration"), "{body}");
    let out = run(&["verify", "--file", direct.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    std::fs::remove_file(&split).ok();
    std::fs::remove_file(&direct).ok();
}

#[test]
fn count2_reads_system_files() {
    let path = tmp("system.txt");
    std::fs::write(&path, "# worked instance\nx1^2 + x2^2\n").unwrap();
    let out = run(&["count2", "--p", "3", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("N = 1"), "{text}");
    assert!(text.contains("holds"), "{text}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn leep_report_verifies() {
    let input = tmp("pencil.txt");
    // small deterministic pencil in 9 variables
    let mut lines = vec!["9 1 1".to_string()];
    let mut state = 7u64;
    for _ in 0..45 {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let a = (state >> 33) % 7;
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let b = (state >> 33) % 5;
        lines.push(format!("{} + {}*t1", a as i64 - 3, b as i64 - 2).replace("+ -", "- "));
    }
    std::fs::write(&input, lines.join("\n")).unwrap();
    let report = tmp("leep.json");
    let out = run(&[
        "leep",
        "--p",
        "5",
        "--file",
        input.to_str().unwrap(),
        "--solve",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = run(&["verify", "--file", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    std::fs::remove_file(&input).ok();
    std::fs::remove_file(&report).ok();
}

#[test]
fn isotropy_and_selftest_run() {
    let out = run(&["isotropy", "--p", "2", "--diag", "1,1,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("anisotropic"));
    let out = run(&["isotropy", "--p", "5", "--diag", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("isotropic"));
    let out = run(&["selftest", "--quick", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn unknown_reports_exit_2_on_verify() {
    let path = tmp("unknown.json");
    let out = run(&[
        "solve",
        "--p",
        "3",
        "--form",
        "x1^2 - 2*x1*x2 + x2^2",
        "--level-max",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}
