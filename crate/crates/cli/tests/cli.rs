//! End-to-end tests driving the binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use num_bigint::BigInt;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-qe"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("padic-qe-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

const SQUARES: &str = r#"{"p": 5, "A": [[2]], "domain": {"tags": ["full"], "e": 1}, "queries": [["100"], ["5"]]}"#;

#[test]
fn decide_squares() {
    let file = write_temp("decide.json", SQUARES);
    let out = run(&["decide", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert_eq!(json["decisions"], serde_json::json!([true, false]));
}

#[test]
fn verify_squares_box_8() {
    let file = write_temp("verify.json", SQUARES);
    let out = run(&["verify", file.to_str().unwrap(), "--box", "8"]);
    let json = stdout_json(&out);
    assert_eq!(json["mismatches"], 0);
    assert!(json["classes_checked"].as_u64().unwrap() >= 9 * 4);
}

#[test]
fn malformed_matrix_is_a_parse_error() {
    let file = write_temp(
        "bad.json",
        r#"{"p": 5, "A": [[-1]], "domain": {"tags": ["full"], "e": 1}}"#,
    );
    let out = run(&["decide", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("negative"), "stderr: {stderr}");
}

#[test]
fn emitted_description_reloads_with_identical_decisions() {
    let file = write_temp("roundtrip.json", SQUARES);
    let emitted = std::env::temp_dir().join(format!(
        "padic-qe-test-{}-emitted.json",
        std::process::id()
    ));
    let out = run(&[
        "image",
        file.to_str().unwrap(),
        "--json",
        emitted.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let direct = run(&["decide", file.to_str().unwrap()]);
    let reloaded = run(&["decide", emitted.to_str().unwrap()]);
    let a = stdout_json(&direct);
    let b = stdout_json(&reloaded);
    assert_eq!(a["decisions"], b["decisions"]);
}

#[test]
fn image_output_is_deterministic() {
    let file = write_temp("determinism.json", SQUARES);
    let first = run(&["image", file.to_str().unwrap()]);
    let second = run(&["image", file.to_str().unwrap()]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "outputs differ between runs");
}

#[test]
fn preimage_witness_squares_to_the_query() {
    let file = write_temp("preimage.json", SQUARES);
    let out = run(&["preimage", file.to_str().unwrap(), "--precision", "12"]);
    let json = stdout_json(&out);
    assert_eq!(json["precision"], 12);
    let witnesses = json["witnesses"].as_array().unwrap();
    assert!(witnesses[1].is_null(), "5 has no square root in Z_5");

    let w = &witnesses[0][0];
    let v = w["v"].as_i64().unwrap();
    let u: BigInt = w["u"].as_str().unwrap().parse().unwrap();
    let n = w["n"].as_u64().unwrap() as u32;
    assert_eq!(v, 1, "a root of 100 has valuation 1");
    // (5^v u)^2 ≡ 100 mod 5^(2v + n)
    let x = BigInt::from(5).pow(v as u32) * u;
    let modulus = BigInt::from(5).pow(2 * v as u32 + n);
    assert_eq!((&x * &x - BigInt::from(100)) % modulus, BigInt::from(0));
}

#[test]
fn tiny_cap_is_a_resource_error() {
    let file = write_temp("cap.json", SQUARES);
    let out = run(&["image", file.to_str().unwrap(), "--cap", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn presburger_qe_command() {
    let file = write_temp(
        "qe.json",
        r#"{"formula": "(exists v (and (>= v 0) (= (+ (* 2 v) (* -1 w)) 0)))"}"#,
    );
    let out = run(&["presburger-qe", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    let eliminated = json["eliminated"].as_str().unwrap();
    assert!(!eliminated.contains("exists"));
    assert!(eliminated.contains("divides"));
}

#[test]
fn lower_command() {
    let file = write_temp("lower.json", r#"{"p": 5, "formula": "(aceq 1 2 1)"}"#);
    let out = run(&["lower", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    let lowered = json["lowered"].as_str().unwrap();
    assert!(lowered.contains("pow"));
    assert!(!lowered.contains("aceq"));
}

#[test]
fn ball_domain_problems() {
    // the ball 7 + 5 Z_5, squared
    let problem = r#"{"p": 5, "A": [[2]], "domain": {"center": ["7"], "radius_exp": 1}, "queries": [["49"], ["144"], ["2"]]}"#;
    let file = write_temp("ball.json", problem);
    let out = run(&["decide", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert_eq!(json["decisions"], serde_json::json!([true, true, false]));

    let out = run(&["preimage", file.to_str().unwrap(), "--precision", "10"]);
    let json = stdout_json(&out);
    let witnesses = json["witnesses"].as_array().unwrap();
    assert!(witnesses[2].is_null());
    // the witness for 49 must square to 49
    let w = &witnesses[0][0];
    let v = w["v"].as_i64().unwrap();
    let u: BigInt = w["u"].as_str().unwrap().parse().unwrap();
    let n = w["n"].as_u64().unwrap() as u32;
    assert_eq!(v, 0);
    let x = BigInt::from(5).pow(v as u32) * u;
    let modulus = BigInt::from(5).pow(n);
    assert_eq!((&x * &x - BigInt::from(49)) % modulus, BigInt::from(0));

    let out = run(&["image", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert!(!json["pieces"].as_array().unwrap().is_empty());

    let out = run(&["verify", file.to_str().unwrap(), "--box", "4"]);
    let json = stdout_json(&out);
    assert_eq!(json["mismatches"], 0);
}

#[test]
fn query_class_triples() {
    // 100 presented as its class 5^2 (4 + O(5^6))
    let problem = r#"{"p": 5, "A": [[2]], "domain": {"tags": ["full"], "e": 1}, "queries": [[{"v": 2, "u": 4, "n": 6}], [{"v": 3, "u": 4, "n": 6}]]}"#;
    let file = write_temp("class.json", problem);
    let out = run(&["decide", file.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert_eq!(json["decisions"], serde_json::json!([true, false]));
}
