use std::process::{Command, Output};

use serde_json::Value;

fn simpref(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simpref"))
        .args(args)
        .env_remove("SIMPREF_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn integrate_succeeds_with_exit_zero() {
    let out = simpref(&["integrate", "--expr", "exp(t)", "--a", "0", "--b", "1", "--class", "c3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["enclosure"]["theorem"], "THM2");
    let (lo, hi) = (v["enclosure"]["lower"].as_f64().unwrap(), v["enclosure"]["upper"].as_f64().unwrap());
    let exact = std::f64::consts::E - 1.0;
    assert!(lo <= exact && exact <= hi);
    assert_eq!(v["tol_met"], true);
}

#[test]
fn domain_errors_exit_one_with_json() {
    let out = simpref(&["integrate", "--expr", "log(t)", "--a", "-1", "--b", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].as_str().unwrap().contains("log"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(simpref(&["bogus"]).status.code(), Some(2));
    assert_eq!(simpref(&["coth", "--y", "0", "--x", "1"]).status.code(), Some(2));
    assert_eq!(simpref(&["integrate", "--expr", "t", "--a", "1", "--b", "0"]).status.code(), Some(2));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_simpref"))
        .args(["sharpness", "--witness", "d"])
        .env("SIMPREF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn panel_cap_exits_three() {
    let out = simpref(&["integrate", "--expr", "exp(t)", "--a", "0", "--b", "1", "--tol", "1e-30", "--panel-cap", "4"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["tol_met"], false);
    assert_eq!(v["panels"], 4);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["integrate", "--expr", "coth(t)/t", "--a", "1", "--b", "2"][..],
        &["search", "--class", "c2", "--seed", "7", "--trials", "8"],
        &["coth", "--y", "0.5", "--x", "1", "--method", "both"],
        &["--format", "csv", "integrate", "--expr", "sin(t)", "--a", "0", "--b", "3", "--panels", "6"],
    ] {
        let first = simpref(args).stdout;
        assert!(!first.is_empty());
        assert_eq!(first, simpref(args).stdout, "{args:?}");
    }
}

#[test]
fn csv_has_one_row_per_panel() {
    let out = simpref(&["--format", "csv", "integrate", "--expr", "sin(t)", "--a", "0", "--b", "3", "--panels", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "a,b,confidence,estimate,lower,theorem,upper,width");
    assert_eq!(lines.count(), 6);
}

#[test]
fn sharpness_reports_closed_form() {
    let v = json(&simpref(&["sharpness", "--witness", "d", "--param", "10"]));
    let (r, c) = (v["ratio"].as_f64().unwrap(), v["closed_form"].as_f64().unwrap());
    assert!((r - c).abs() <= 1e-12 * c);
}
