use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn aclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aclab"))
        .args(args)
        .env_remove("ACLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn column(out: &Output, col: usize) -> Vec<String> {
    stdout(out)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(col).unwrap_or("").to_string())
        .collect()
}

#[test]
fn eval_examples() {
    let out = aclab(&["eval", "preset:takagi-tent", "--point", "0,0"]);
    assert!(out.status.success());
    assert_eq!(column(&out, 1), ["1/2"]);

    let out = aclab(&["eval", "product(h=const:1,g=tent,d=1/2)", "--point", "1,1"]);
    assert_eq!(column(&out, 1), ["0"]);

    let out = aclab(&["eval", "preset:cantor-luzin", "--point", "0,1/2"]);
    assert_eq!(column(&out, 1), ["1/3"]);
}

#[test]
fn eval_marks_poles_and_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.txt");
    fs::write(&path, "# probes\n0,0\n1/10,1/5  # off the pole\n").unwrap();
    let out = aclab(&["eval", "preset:unbounded", "--points-file", path.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let rows = json(&out);
    assert!(rows[0]["error"].as_str().unwrap().starts_with("pole"));
    assert!((rows[1]["approx"].as_f64().unwrap() - 20f64.sqrt()).abs() < 1e-12);
}

#[test]
fn refute_product_violates() {
    let out = aclab(&[
        "refute",
        "preset:cbrt-product",
        "--class",
        "1ac",
        "--delta",
        "0.01",
        "--method",
        "analytic:product",
        "--k",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["verdict"], "violates");
    assert!((rep["sum_osc"].as_f64().unwrap() - 6.2996).abs() < 1e-3);
    assert_eq!(rep["sum_measure"], "1/4000");
}

#[test]
fn refute_thin_interval_with_exact_delta() {
    let out = aclab(&["refute", "affine:x", "--class", "strong0ac", "--pair", "0,0:1,0", "--delta", "1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["method"], "analytic:strong0ac");
    assert_eq!(rep["delta"], "1/10000");
    assert_eq!(rep["sum_osc_exact"], "1");
}

#[test]
fn refute_greedy_on_lipschitz_is_inconclusive() {
    let out = aclab(&[
        "refute", "affine:x", "--class", "1ac", "--method", "greedy", "--delta", "0.01", "--candidates", "2000",
        "--iterations", "2000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["verdict"], "inconclusive");
}

#[test]
fn oracle_on_coordinate_function() {
    let out = aclab(&["oracle", "affine:x", "--class", "1ac", "--delta", "0.1", "--grid", "2", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let rep = json(&out);
    assert_eq!(rep["sum_osc_exact"], "1/16");
    assert_eq!(rep["method"], "oracle");
}

#[test]
fn hierarchy_stats_rows() {
    let out = aclab(&["hierarchy", "--depth", "3", "--stats"]);
    assert!(out.status.success());
    let rows: Vec<Vec<String>> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').take(3).map(str::to_string).collect())
        .collect();
    assert_eq!(rows, [["1", "1", "1/2"], ["2", "8", "1/8"], ["3", "192", "1/48"]]);
}

#[test]
fn hierarchy_capacity_error() {
    let out = aclab(&["hierarchy", "--depth", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}

#[test]
fn hierarchy_exports() {
    let dir = tempfile::tempdir().unwrap();
    let squares = dir.path().join("squares.jsonl");
    let family = dir.path().join("family.json");
    let out = aclab(&[
        "hierarchy",
        "--depth",
        "4",
        "--witness",
        "2:4",
        "--squares",
        squares.to_str().unwrap(),
        "--output",
        family.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = fs::read_to_string(&squares).unwrap();
    assert_eq!(lines.lines().count(), 1 + 8 + 192 + 9216);
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["level"], 1);
    let rep: Value = serde_json::from_str(&fs::read_to_string(&family).unwrap()).unwrap();
    assert_eq!(rep["params"]["per_level_osc"], "13/48");
    assert_eq!(rep["sum_osc_exact"], "13/48");
    assert_eq!(rep["family"].as_array().unwrap().len(), 8 + 192 + 9216);
}

#[test]
fn scan_examples() {
    let out = aclab(&["scan", "preset:takagi-tent", "--kind", "dirderiv", "--point", "0.1,0.3", "--dir", "1,1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next().unwrap(), "scale\testimate\tflag");
    assert_eq!(column(&out, 2).last().unwrap(), "converged");

    let out = aclab(&["scan", "preset:w11-not-w12", "--kind", "energy", "--rect", "0,0:1,1", "--levels", "8"]);
    let energy: Vec<f64> = column(&out, 1).iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(energy.len(), 8);
    assert!(energy.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(column(&out, 2).last().unwrap(), "divergence-suspected");

    let out = aclab(&["scan", "affine:x+y", "--kind", "lip", "--point", "0.5,0.5"]);
    for v in column(&out, 1) {
        assert!((v.parse::<f64>().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let args = [
        "refute",
        "preset:cbrt-product",
        "--class",
        "1ac",
        "--method",
        "greedy",
        "--delta",
        "0.01",
        "--seed",
        "9",
        "--candidates",
        "3000",
        "--iterations",
        "3000",
    ];
    let a = aclab(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_aclab"))
        .args(args)
        .env("ACLAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 9);
}

#[test]
fn parse_errors_report_position() {
    let out = aclab(&["eval", "product(h=const:1,g=tnet)", "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1, column"), "{err}");
}

#[test]
fn dump_config_echoes_resolution() {
    let out = aclab(&["--dump-config", "refute", "preset:cbrt-product", "--class", "1ac", "--delta", "1e-2"]);
    assert!(out.status.success());
    let cfg = json(&out);
    assert_eq!(cfg["resolved_method"], "analytic:product");
    assert_eq!(cfg["resolved_class"], "1ac^2");
    assert_eq!(cfg["command"]["class"]["delta"], "1/100");
}

#[test]
fn method_mismatch_is_an_error() {
    let out = aclab(&["refute", "affine:x", "--class", "1ac", "--delta", "0.01", "--method", "analytic:product"]);
    assert_eq!(out.status.code(), Some(1));
}
