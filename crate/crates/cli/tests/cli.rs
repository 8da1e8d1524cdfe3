use std::process::{Command, Output};

use serde_json::Value;

fn treediff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treediff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = treediff(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn approx(v: &Value, want: f64) -> bool {
    v.as_f64().is_some_and(|x| (x - want).abs() <= 1e-12)
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = treediff(&["verify"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = treediff(&["verify"]);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["results"]["summary"]["failed"], 0);
    assert_eq!(doc["results"]["summary"]["skipped"], 0);
    let ids: std::collections::BTreeSet<u64> = doc["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, (1..=14).collect());
}

#[test]
fn explicit_shape_skips_other_shapes() {
    let doc = json(&["--shape", "constant:1", "verify"]);
    let checks = doc["results"]["checks"].as_array().unwrap();
    for c in checks {
        let status = c["status"].as_str().unwrap();
        match c["shape"].as_str() {
            Some("constant:1") | None => assert_eq!(status, "pass", "{c}"),
            Some(_) => assert_eq!(status, "skipped", "{c}"),
        }
    }
    assert!(doc["results"]["summary"]["skipped"].as_u64().unwrap() > 0);
}

#[test]
fn zero_depth_is_a_usage_error() {
    let out = treediff(&["--depth", "0", "alpha"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn nonpositive_weight_is_a_numeric_error() {
    let out = treediff(&["--space", "weighted", "--weight", "table:1,0,1", "norm", "--function", "zero"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn lipschitz_characteristic_ratio() {
    let doc = json(&["norm", "--function", "chi:[0,1]", "--op", "D"]);
    assert!(approx(&doc["results"]["ratio"], 2.0));
    assert_eq!(doc["results"]["certified"], true);
}

#[test]
fn hardy_witness_ratio() {
    let doc = json(&["--space", "hardy:q=2,p=2", "norm", "--function", "hardy-witness"]);
    assert!(approx(&doc["results"]["ratio"], 2.0));
    assert_eq!(doc["results"]["certified"], true);
}

#[test]
fn weighted_alternating_witness_ratio() {
    let doc = json(&[
        "--space",
        "weighted",
        "--weight",
        "expr:pow(M-1,n)",
        "--param",
        "M=1.5",
        "norm",
        "--function",
        "alt-witness",
    ]);
    assert!(approx(&doc["results"]["ratio"], 1.5));
    assert_eq!(doc["results"]["certified"], true);
}

#[test]
fn alpha_is_one_on_every_level() {
    let doc = json(&["--depth", "12", "alpha"]);
    let values = doc["results"]["alpha"].as_array().unwrap();
    assert_eq!(values.len(), 12);
    assert!(values.iter().all(|v| v.as_f64() == Some(1.0)));
}

#[test]
fn one_is_not_an_eigenvalue() {
    let doc = json(&["eigen", "--lambda", "1,0"]);
    assert_eq!(doc["results"]["classification"]["verdict"], "OnlyZeroFunction");
}

#[test]
fn lipschitz_spectrum_is_the_unit_disk_about_one() {
    let doc = json(&["spectrum"]);
    let exact = &doc["results"]["spectrum"]["exact"];
    assert!(approx(&exact["radius"], 1.0), "{exact}");
    assert_eq!(exact["center"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn matrix_dimension_cap() {
    let out = treediff(&["--depth", "9", "matrix", "--op", "D", "--cap", "100"]);
    assert_ne!(out.status.code(), Some(0));
    let doc = json(&["--depth", "2", "matrix", "--op", "I-Cb"]);
    assert_eq!(doc["results"]["dim"], 10);
    assert_eq!(doc["results"]["lower_triangular"], true);
}

#[test]
fn function_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    std::fs::write(&input, r#"{"kind":"sparse","entries":[{"v":[0,1],"re":1.0,"im":0.0}]}"#).unwrap();
    let output = dir.path().join("report.json");
    let out = treediff(&[
        "--output",
        output.to_str().unwrap(),
        "norm",
        "--function",
        input.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert!(approx(&doc["results"]["ratio"], 2.0));
}

#[test]
fn missing_function_file_is_a_usage_error() {
    let out = treediff(&["norm", "--function", "/nonexistent/f.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tsv_output_has_a_header() {
    let out = treediff(&["--format", "tsv", "--depth", "3", "alpha"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n\talpha\n1\t1\n2\t1\n3\t1\n");
}
