use serde_json::Value;
use std::process::{Command, Output};

fn nilreturn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilreturn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = nilreturn(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn rows(v: &Value) -> &Vec<Value> {
    v["data"]["rows"].as_array().unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn first_coefficient_identity() {
    let v = json(&["coeffs", "--order", "3"]);
    let r = rows(&v);
    assert_eq!(r.len(), 3);
    let (c1, x1) = (num(&r[0]["c_n"]), num(&r[0]["X_n"]));
    assert!((x1 + 2f64.powf(1.5) * c1).abs() <= 4.0 * f64::EPSILON * x1.abs());
    assert!((c1 - nilreturn::C1_EXACT).abs() <= 1e-9);
    assert!(num(&v["data"]["c1_oracle"]["difference"]).abs() <= 1e-9);
    for row in r {
        assert!(row["c_n_error"].is_number() && row["X_n_error"].is_number());
    }
}

#[test]
fn grid_size_changes_c1() {
    let coarse = json(&["coeffs", "--order", "1", "--grid", "64"]);
    let fine = json(&["coeffs", "--order", "1", "--grid", "4096"]);
    let d = num(&rows(&coarse)[0]["c_n"]) - num(&rows(&fine)[0]["c_n"]);
    assert!(d.abs() > 0.0);
    assert!(num(&rows(&coarse)[0]["c_n_error"]) > num(&rows(&fine)[0]["c_n_error"]));
    assert_eq!(coarse["meta"]["grid"], 64);
}

#[test]
fn verify_slopes_and_control() {
    let v = json(&["verify", "--order", "3"]);
    let fits = v["data"]["fits"].as_array().unwrap();
    assert!((num(&fits[0]["slope"]) - 4.0).abs() < 0.3);
    assert!((num(&fits[3]["slope"]) - 13.0).abs() < 1.0);
    assert_eq!(v["data"]["control"]["pass"], true);
    assert!(num(&v["data"]["control"]["residual"]).abs() <= 10.0 * 1e-12);
}

#[test]
fn sweep_keeps_input_order() {
    let v = json(&["verify", "--order", "1", "--epsilon", "0.4,0.2,0.3"]);
    let eps: Vec<f64> = rows(&v).iter().map(|r| num(&r["epsilon"])).collect();
    assert_eq!(eps, [0.4, 0.2, 0.3]);
    let range = json(&["verify", "--order", "1", "--epsilon-range", "0.2:0.4:3"]);
    assert_eq!(rows(&range).len(), 3);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--order", "2", "--epsilon", "0.2,0.3,0.4"];
    let (a, b) = (nilreturn(&args), nilreturn(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fixed_point_at_zero_delta() {
    let v = json(&["fixedpoint", "--delta", "0"]);
    let r = &rows(&v)[0];
    assert_eq!(r["iterations"], 1);
    assert_eq!(num(&r["v_at_1"]), 0.0);
    let samples = v["data"]["solutions"][0]["samples"].as_array().unwrap();
    assert!(samples.iter().all(|s| num(&s["v"]) == 0.0));
}

#[test]
fn fixed_point_contraction() {
    let v = json(&["fixedpoint", "--delta", "0.05,0.1,0.2", "--samples", "5"]);
    for r in rows(&v) {
        let bound = num(&r["contraction_bound"]) + 0.05;
        assert!(num(&r["contraction_estimate"]) <= bound);
        assert!(num(&r["series_sup_difference"]) < 1e-8);
    }
}

#[test]
fn melnikov_forms_agree() {
    let v = json(&["melnikov", "--T", "1"]);
    let r = &rows(&v)[0];
    let (a, b) = (num(&r["closed_form"]), num(&r["quadrature"]));
    assert!((a - b).abs() / b <= 1e-10);
}

#[test]
fn trace_crossings() {
    let v = json(&["trace", "--eta", "1", "--alpha", "0.05", "--samples", "50"]);
    let axes: Vec<&str> = v["data"]["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["axis"].as_str().unwrap())
        .collect();
    assert_eq!(
        axes,
        ["positive-y", "negative-x", "negative-y", "positive-x"]
    );
    assert_eq!(rows(&v).len(), 50);
    assert_eq!(v["data"]["lyapunov"]["strictly_decreased"], true);
}

#[test]
fn csv_round_trip_precision() {
    let out = nilreturn(&["coeffs", "--order", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,c_n,c_n_error,X_n,X_n_error"));
    let json_c1 = num(&rows(&json(&["coeffs", "--order", "2"]))[0]["c_n"]);
    let csv_c1: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(csv_c1, json_c1);
    assert_eq!(lines.count(), 1);
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test\norder = 2\ngrid = 128\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let v = json(&["coeffs", "--config", cfg]);
    assert_eq!(rows(&v).len(), 2);
    assert_eq!(v["meta"]["grid"], 128);
    let v = json(&["coeffs", "--config", cfg, "--order", "3"]);
    assert_eq!(rows(&v).len(), 3);
    assert_eq!(v["meta"]["grid"], 128);
}

#[test]
fn writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = nilreturn(&[
        "melnikov",
        "--T",
        "0.25,1,2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(
        nilreturn(&["coeffs", "--order", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nilreturn(&["verify", "--epsilon", "0.7"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nilreturn(&["verify", "--tol", "1e-3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nilreturn(&["fixedpoint", "--delta", "0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(nilreturn(&["melnikov", "--T", "-1"]).status.code(), Some(2));
    assert_eq!(
        nilreturn(&["coeffs", "--config", "/nonexistent"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(
        nilreturn(&["coeffs", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    // overwhelming damping: the explicit integrator cannot take a step
    let out = nilreturn(&["trace", "--alpha", "1e12", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrat"));
}
