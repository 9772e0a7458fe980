//! End-to-end runs of the `padic-dm` binary.

use std::process::Command;

use padic_dm::text;
use padic_dm::FieldSpec;
use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_padic-dm"));
    cmd.args(args).env_remove("PADIC_DM_MAX_ITER");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

const SPLITTABLE: &str = "T^2 - (1/5)*T + x";

#[test]
fn radii_report_lists_both_radii() {
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "radii", "--op", SPLITTABLE], &[]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], 1);
    let entries = r["result"]["profiles"][0]["entries"].as_array().unwrap();
    let pairs: Vec<(&str, u64)> = entries.iter().map(|e| (e["lv"].as_str().unwrap(), e["mult"].as_u64().unwrap())).collect();
    assert_eq!(pairs, vec![("5/4", 1), ("1/4", 1)]);
}

#[test]
fn missing_input_is_a_parse_error() {
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "radii"], &[]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["code"], "ParseError");
}

#[test]
fn malformed_operator_reports_a_position() {
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "radii", "--op", "T^2 + (x"], &[]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["code"], "ParseError");
    assert!(r["error"]["message"].as_str().unwrap().contains("--op #1"));
}

#[test]
fn pure_module_decomposes_into_one_component() {
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "decompose", "--op", "T - 1/5"], &[]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["decomposition"]["components"].as_array().unwrap().len(), 1);
}

#[test]
fn splittable_module_decomposes_with_certificate() {
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "decompose", "--op", SPLITTABLE], &[]);
    assert_eq!(code, 0);
    let comps = r["result"]["decomposition"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(r["result"]["decomposition"]["certificate"]["pass"], true);
    // Printed operators re-parse.
    let f = FieldSpec::gauss(5, 1).unwrap();
    for c in comps {
        let op = c["operator"].as_str().unwrap();
        let p = text::parse_operator(&f, op, 0).unwrap();
        assert_eq!(p.fmt_with(&f), op);
    }
}

#[test]
fn zero_budget_aborts_with_exit_three() {
    let args = ["--field", "gauss:p=5:vars=x", "--cmd", "decompose", "--op", SPLITTABLE, "--precision", "N=10,max_iter=0"];
    let (code, r) = run(&args, &[]);
    assert_eq!(code, 3);
    assert_eq!(r["error"]["code"], "IterationBudget");
    let (code, r) = run(&["--field", "gauss:p=5:vars=x", "--cmd", "decompose", "--op", SPLITTABLE], &[("PADIC_DM_MAX_ITER", "0")]);
    assert_eq!(code, 3);
    assert_eq!(r["inputs"]["precision"]["max_iter"], 0);
}

#[test]
fn multi_decompose_separates_the_two_derivations() {
    let args = ["--field", "gauss:p=5:vars=x,y", "--cmd", "multi-decompose", "--mat", "1/5,0;0,0", "--mat", "0,0;0,1/5"];
    let (code, r) = run(&args, &[]);
    assert_eq!(code, 0);
    let keys: Vec<Vec<&str>> = r["result"]["decomposition"]["keys"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect())
        .collect();
    assert_eq!(keys, vec![vec!["5/4", "1/4"], vec!["1/4", "5/4"]]);
}

#[test]
fn non_integrable_matrices_are_rejected() {
    let args = ["--field", "gauss:p=5:vars=x,y", "--cmd", "radii", "--mat", "0,y;0,0", "--mat", "0,0;0,0"];
    let (code, r) = run(&args, &[]);
    assert_eq!(code, 1);
    assert_eq!(r["error"]["code"], "IntegrabilityError");
}

#[test]
fn dual_and_verify_pass_on_a_laurent_module() {
    let base = ["--field", "laurent:z", "--mat", "1/z^3,1;0,z"];
    let (code, r) = run(&[&base[..], &["--cmd", "dual"]].concat(), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["biduality"], true);
    let (code, r) = run(&[&base[..], &["--cmd", "verify"]].concat(), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["checks"][0]["oracle"]["agrees"], true);
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let args = ["--field", "gauss:p=5:vars=x", "--cmd", "decompose", "--op", SPLITTABLE];
    let (_, mut a) = run(&args, &[]);
    let (_, mut b) = run(&args, &[]);
    a["timing"] = Value::Null;
    b["timing"] = Value::Null;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = dir.path().join("job.json");
    let job = serde_json::json!({"field": "laurent:z", "cmd": "radii", "op": ["T - 1/z^2"], "out": out});
    std::fs::write(&cfg, job.to_string()).unwrap();
    let (code, stdout) = run(&["--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code, 0);
    assert_eq!(stdout, Value::Null);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["profiles"][0]["entries"][0]["lv"], "2");
}
