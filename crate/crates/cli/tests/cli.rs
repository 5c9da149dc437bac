use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn milnor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milnor")).args(args).current_dir(dir).env_remove("MILNOR_PRECISION").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn matrix(dir: &Path, name: &str, rows: &[&[i64]]) -> PathBuf {
    let entries: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| format!("{x}/1")).collect()).collect();
    let path = dir.join(name);
    std::fs::write(&path, serde_json::json!({ "n": rows.len(), "entries": entries }).to_string()).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// diag(1,1) with the reflection diag(1,-1).
fn reflection(dir: &Path) {
    matrix(dir, "g.json", &[&[1, 0], &[0, 1]]);
    matrix(dir, "s.json", &[&[1, 0], &[0, -1]]);
}

const PAIR: [&str; 6] = ["--gram", "g.json", "--iso", "s.json", "--prime", "5"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(tail).copied().collect()
}

#[test]
fn decide_identity_is_condition_one() {
    let d = TempDir::new().unwrap();
    matrix(d.path(), "g.json", &[&[1]]);
    matrix(d.path(), "s.json", &[&[1]]);
    let o = milnor(&with(&["decide"], &PAIR), d.path());
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["verdict"]["condition"], "(i)");
    assert_eq!(r["verdict"]["single_class"], true);
}

#[test]
fn decide_reflection_fails_with_m0() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    let o = milnor(&with(&["decide"], &PAIR), d.path());
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["verdict"]["failing_clause"], "m0-too-big");
    // analyze reports the same verdict but exits 0
    assert_eq!(code(&milnor(&with(&["analyze"], &PAIR), d.path())), 0);
}

#[test]
fn counterexample_writes_verified_witness() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    let o = milnor(&with(&["counterexample"], &PAIR), d.path());
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["recipe"]["case"], "both-one-dim");
    assert_eq!(r["check"]["o_conjugate"], false);
    let w: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("witness.gram.json")).unwrap()).unwrap();
    assert_eq!(w["entries"], serde_json::json!([["5/1", "0/1"], ["0/1", "5/1"]]));

    // the witness is GL- but not O-conjugate to the input
    let o = milnor(
        &["compare", "--a-gram", "g.json", "--a-iso", "s.json", "--b-gram", "witness.gram.json", "--b-iso", "witness.iso.json", "--prime", "5"],
        d.path(),
    );
    assert_eq!(code(&o), 3);
    let r = stdout_json(&o);
    assert_eq!((r["gl_conjugate"].clone(), r["ambient_isometric"].clone()), (Value::Bool(true), Value::Bool(true)));
}

#[test]
fn counterexample_on_single_class_exits_5() {
    let d = TempDir::new().unwrap();
    matrix(d.path(), "g.json", &[&[1]]);
    matrix(d.path(), "s.json", &[&[1]]);
    assert_eq!(code(&milnor(&with(&["counterexample"], &PAIR), d.path())), 5);
}

#[test]
fn compare_exit_codes() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    // a base change of the same pair: O-conjugate
    matrix(d.path(), "g2.json", &[&[1, 0], &[0, 1]]);
    matrix(d.path(), "s2.json", &[&[-1, 0], &[0, 1]]);
    let cmp = |b: &str, s: &str| milnor(&["compare", "--a-gram", "g.json", "--a-iso", "s.json", "--b-gram", b, "--b-iso", s, "--prime", "5"], d.path());
    assert_eq!(code(&cmp("g2.json", "s2.json")), 0);
    // different characteristic polynomial: unrelated
    matrix(d.path(), "s3.json", &[&[1, 0], &[0, 1]]);
    assert_eq!(code(&cmp("g2.json", "s3.json")), 4);
}

#[test]
fn realize_then_analyze_matches_prediction() {
    let d = TempDir::new().unwrap();
    write(
        d.path(),
        "spec.json",
        r#"{"blocks": [
            {"factor": ["-1", "1"], "type": "minus_one", "level": 3, "rank": 1, "residual": ["2"]},
            {"factor": ["1", "-3", "1"], "type": "self_reciprocal", "level": 1, "rank": 1, "residual": ["1"]},
            {"factor": ["-2", "1"], "type": "paired", "level": 2, "rank": 1, "residual": []}
        ]}"#,
    );
    let o = milnor(&["realize", "--spec", "spec.json", "--prime", "5"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let predicted = stdout_json(&o)["blocks"].clone();
    let o = milnor(&["analyze", "--gram", "gram.json", "--iso", "iso.json", "--prime", "5"], d.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["blocks"], predicted);
}

#[test]
fn reports_are_byte_deterministic() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    let a = milnor(&with(&["analyze"], &PAIR), d.path());
    let b = milnor(&with(&["analyze"], &PAIR), d.path());
    assert_eq!(a.stdout, b.stdout);
    let r = stdout_json(&a);
    assert_eq!(r["inputs"]["gram_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn precision_flag_and_environment() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    let o = milnor(&with(&["analyze"], &with(&PAIR, &["--precision", "25"])), d.path());
    assert_eq!(stdout_json(&o)["precision"], 25);
    let o = Command::new(env!("CARGO_BIN_EXE_milnor"))
        .args(with(&["analyze"], &PAIR))
        .current_dir(d.path())
        .env("MILNOR_PRECISION", "30")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["precision"], 30);
    assert_eq!(stdout_json(&milnor(&with(&["analyze"], &PAIR), d.path()))["precision"], 40);
}

#[test]
fn malformed_input_exits_2() {
    let d = TempDir::new().unwrap();
    reflection(d.path());
    write(d.path(), "junk.json", "{not json");
    let bad_gram = milnor(&["decide", "--gram", "junk.json", "--iso", "s.json", "--prime", "5"], d.path());
    assert_eq!(code(&bad_gram), 2);
    assert!(!bad_gram.stderr.is_empty());
    // not an isometry of the form
    matrix(d.path(), "shear.json", &[&[1, 1], &[0, 1]]);
    assert_eq!(code(&milnor(&["decide", "--gram", "g.json", "--iso", "shear.json", "--prime", "5"], d.path())), 2);
    // composite "prime"
    assert_eq!(code(&milnor(&["decide", "--gram", "g.json", "--iso", "s.json", "--prime", "6"], d.path())), 2);
    // row count disagrees with n
    write(d.path(), "short.json", r#"{"n": 2, "entries": [["1", "0"]]}"#);
    assert_eq!(code(&milnor(&["decide", "--gram", "short.json", "--iso", "s.json", "--prime", "5"], d.path())), 2);
    // missing flag
    assert_eq!(code(&milnor(&["decide", "--gram", "g.json"], d.path())), 2);
}

#[test]
fn irregular_factor_suggests_certificate() {
    let d = TempDir::new().unwrap();
    write(d.path(), "spec.json", r#"{"blocks": [{"factor": ["7", "0", "1"], "type": "paired", "level": 1, "rank": 1, "residual": []}]}"#);
    assert_eq!(code(&milnor(&["realize", "--spec", "spec.json", "--prime", "3"], d.path())), 0);
    let o = milnor(&["decide", "--gram", "gram.json", "--iso", "iso.json", "--prime", "2"], d.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--certificate"));
    // a certificate whose factors do not divide is rejected as bad input
    write(d.path(), "cert.json", r#"{"factors": [["1", "1"], ["3", "1"]]}"#);
    let o = milnor(&["decide", "--gram", "gram.json", "--iso", "iso.json", "--prime", "2", "--certificate", "cert.json"], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn selftest_passes() {
    let d = TempDir::new().unwrap();
    let o = milnor(&["selftest", "--count", "2"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["failures"], 0);
}
