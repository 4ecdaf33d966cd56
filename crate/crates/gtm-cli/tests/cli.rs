//! End-to-end tests of the `gtm` binary: JSON contracts and exit codes.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn gtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtm"))
        .args(args)
        .env_remove("GTM_SEED")
        .output()
        .expect("binary runs")
}

fn gtm_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gtm"))
        .args(args)
        .env_remove("GTM_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(stdin.as_bytes())
        .expect("stdin writable");
    child.wait_with_output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("valid JSON on stdout")
}

#[test]
fn classify_detects_the_critical_pair() {
    let out = gtm_stdin(&["classify"], r#"{"n":3,"rows":[["2","0","-2"],["1","1"],["1"]]}"#);
    let json = stdout_json(&out);
    assert_eq!(json["is_1_critical"], true);
    assert_eq!(json["critical_pairs"], serde_json::json!([[2, 1, 2]]));
}

#[test]
fn classify_detects_genericity() {
    let out = gtm_stdin(&["classify"], r#"{"n":3,"rows":[["0","0","0"],["1/2","0"],["1/4"]]}"#);
    let json = stdout_json(&out);
    assert_eq!(json["generic"], true);
}

#[test]
fn classify_rejects_malformed_rows_with_exit_2() {
    let out = gtm_stdin(&["classify"], r#"{"n":3,"rows":[["2","0"],["1","1"],["1"]]}"#);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn act_applies_the_raising_generator() {
    let vector = r#"{"spec":{"family":"finite_dim","lambda":[1,0]},
        "terms":[{"tag":{"kind":"Std","tableau":{"n":2,"rows":[["1","-1"],["0"]]}},"coeff":"1"}]}"#;
    let out = gtm(&["act", "--generator", "E,1,2", "--vector", vector]);
    let json = stdout_json(&out);
    assert_eq!(json["terms"][0]["coeff"], "1");
    assert_eq!(json["terms"][0]["tag"]["tableau"]["rows"][1][0], "1");
}

#[test]
fn act_diagonal_on_a_singular_symmetric_tag() {
    let vector = r#"{"spec":{"family":"one_singular",
            "tableau":{"n":3,"rows":[["2","0","-2"],["1","1"],["1"]]},"pair":[2,1,2]},
        "terms":[{"tag":{"kind":"Sym","shift":{"n":3,"rows":[["0","0"],["0"]]}},"coeff":"1"}]}"#;
    let out = gtm(&["act", "--generator", "E,1,1", "--vector", vector]);
    let json = stdout_json(&out);
    assert_eq!(json["terms"][0]["coeff"], "1");
    assert_eq!(json["terms"][0]["tag"]["kind"], "Sym");
}

#[test]
fn act_casimir_matches_the_row_invariant() {
    let vector = r#"{"spec":{"family":"generic","tableau":{"n":2,"rows":[["1","-1"],["1/2"]]}},
        "terms":[{"tag":{"kind":"Gen","shift":{"n":2,"rows":[["0"]]}},"coeff":"1"}]}"#;
    let out = gtm(&["act", "--generator", "C,2,1", "--vector", vector]);
    let json = stdout_json(&out);
    assert_eq!(json["terms"][0]["coeff"], "1");
}

#[test]
fn act_rejects_a_mismatched_spec_with_exit_2() {
    let vector = r#"{"spec":{"family":"finite_dim","lambda":[1,0]},
        "terms":[{"tag":{"kind":"Std","tableau":{"n":2,"rows":[["1","-1"],["0"]]}},"coeff":"1"}]}"#;
    let out = gtm(&[
        "act",
        "--generator",
        "E,1,2",
        "--vector",
        vector,
        "--spec",
        r#"{"family":"finite_dim","lambda":[2,0]}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = gtm(&["act", "--generator", "E,9,9", "--vector", vector]);
    assert_eq!(out.status.code(), Some(2));

    let out = gtm(&["act", "--generator", "X,1,2", "--vector", vector]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn basis_counts_match_the_dimension_formula() {
    let out = gtm(&["basis", "--spec", r#"{"family":"finite_dim","lambda":[1,0,0]}"#]);
    let json = stdout_json(&out);
    assert_eq!(json["dimension"], 3);
    assert_eq!(json["weyl_dimension"], 3);
    assert_eq!(json["tableaux"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_rejects_rank_below_two_with_exit_2() {
    let out = gtm(&["verify", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_small_run_passes_and_is_byte_identical() {
    let args = [
        "verify",
        "--n-max",
        "2",
        "--seed",
        "42",
        "--suite",
        "bracket",
        "--suite",
        "dimension",
    ];
    let first = gtm(&args);
    assert_eq!(first.status.code(), Some(0));
    let second = gtm(&args);
    assert_eq!(first.stdout, second.stdout);

    // every line is JSON and no number anywhere is floating point
    for line in String::from_utf8(first.stdout).unwrap().lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_no_floats(&value);
    }
}

fn assert_no_floats(value: &serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            assert!(n.is_i64() || n.is_u64(), "float leaked into output: {n}")
        }
        serde_json::Value::Array(items) => items.iter().for_each(assert_no_floats),
        serde_json::Value::Object(map) => map.values().for_each(assert_no_floats),
        _ => {}
    }
}

#[test]
fn verify_seed_env_override_changes_instances() {
    let by_flag = gtm(&["verify", "--n-max", "2", "--seed", "7", "--suite", "bracket"]);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gtm"));
    let by_env = cmd
        .args(["verify", "--n-max", "2", "--suite", "bracket"])
        .env("GTM_SEED", "7")
        .output()
        .expect("binary runs");
    assert_eq!(by_flag.stdout, by_env.stdout);
}

#[test]
fn mutated_formulas_fail_with_exit_1() {
    let out = gtm(&[
        "verify",
        "--n-max",
        "2",
        "--suite",
        "bracket",
        "--mutate",
        "sign-e12",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = gtm(&["verify", "--mutate", "no-such-mutation"]);
    assert_eq!(out.status.code(), Some(2));
}
