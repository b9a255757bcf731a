use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pcf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf"))
        .args(args)
        .current_dir(dir)
        .env_remove("PCF_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = pcf(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn info_reports_vicsek_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let v: Value = serde_json::from_str(&ok(dir.path(), &["info", "--preset", "vicsek"])).unwrap();
    let (l3, l5, l15) = (3f64.ln(), 5f64.ln(), 15f64.ln());
    assert!((v["d_h"].as_f64().unwrap() - l5 / l3).abs() < 1e-12);
    assert!((v["d_w"].as_f64().unwrap() - l15 / l3).abs() < 1e-12);
    assert!((v["d_s"].as_f64().unwrap() - 2.0 * l5 / l15).abs() < 1e-12);
    assert_eq!(v["harmonic_structure_verified"], Value::Bool(true));
}

#[test]
fn interval_curve_is_constant_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["critical-curve", "--preset", "interval", "--pmin", "1", "--pmax", "8", "--pcount", "6", "--levels", "6", "--seed", "7"];
    let mut a: Vec<&str> = args.to_vec();
    a.extend(["--out", "a.csv"]);
    ok(dir.path(), &a);
    let mut b: Vec<&str> = args.to_vec();
    b.extend(["--out", "b.csv"]);
    ok(dir.path(), &b);
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("b.csv")).unwrap());

    let (header, rows) = parse_csv(std::str::from_utf8(&first).unwrap());
    assert_eq!(header, ["p", "inv_p", "lambda_hat", "C_hat", "C_lo", "C_hi", "fit_residual"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| (r[3] - 1.0).abs() < 1e-9));

    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["command"], "critical-curve");
    assert_eq!(manifest["summary"]["all_passed"], Value::Bool(true));
    assert!(manifest["descriptor"]["H"].is_array());
}

#[test]
fn constant_function_has_zero_seminorm() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["direct", "haar", "graph", "tent", "heat"] {
        let text = ok(
            dir.path(),
            &["besov-norm", "--preset", "sg", "--level", "3", "--p", "2", "--q", "inf", "--sigma", "0.5", "--method", method, "--constant", "-2.5"],
        );
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(v["seminorm"].as_f64().unwrap().abs() < 1e-10, "{method}");
        assert!((v["value"].as_f64().unwrap() - 2.5).abs() < 1e-10, "{method}");
    }
}

#[test]
fn regions_and_spectrum_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (header, rows) = parse_csv(&ok(dir.path(), &["regions", "--preset", "sg", "--levels", "5", "--pcount", "5", "--seed", "1"]));
    assert_eq!(header, ["inv_p", "L1", "L2", "C_hat", "C_lower", "C_upper"]);
    assert_eq!(rows.len(), 5);
    let (header, rows) = parse_csv(&ok(dir.path(), &["spectrum", "--preset", "interval", "--level", "6", "--count", "4"]));
    assert_eq!(header, ["index", "lambda"]);
    assert!(rows[0][1].abs() < 1e-9);
    assert!((rows[1][1] / std::f64::consts::PI.powi(2) - 1.0).abs() < 0.01);
}

#[test]
fn laplacian_writes_matrix_and_id_map() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["laplacian", "--preset", "sg", "--level", "2", "--out", "h.mtx"]);
    let mtx = std::fs::read_to_string(dir.path().join("h.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
    let ids = std::fs::read_to_string(dir.path().join("h.mtx.ids.csv")).unwrap();
    assert_eq!(ids.lines().count(), 1 + 15);
    assert!(dir.path().join("h.mtx.manifest.json").exists());
}

#[test]
fn resistance_and_extension() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rows) = parse_csv(&ok(dir.path(), &["resistance", "--preset", "sg", "--level", "3", "--from", "0", "--to", "1"]));
    assert!((rows[0][2] - 2.0 / 3.0).abs() < 1e-9);
    let (header, rows) = parse_csv(&ok(dir.path(), &["extend", "--preset", "sg", "--level", "1", "--boundary", "1,0,0"]));
    assert_eq!(header, ["vertex", "value"]);
    let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(values.len(), 6);
    assert!(values[3..].iter().all(|&v| (v - 0.4).abs() < 1e-12 || (v - 0.2).abs() < 1e-12));
}

#[test]
fn cache_hits_reproduce_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let args = |out: &'static str| {
        vec!["equivalence", "--preset", "sg", "--p", "2", "--q", "2", "--sigma", "0.9", "--level", "3", "--n", "5", "--seed", "3", "--cache-dir", cache, "--out", out]
    };
    ok(dir.path(), &args("a.json"));
    ok(dir.path(), &args("b.json"));
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    let m: Value = serde_json::from_slice(&read("b.json.manifest.json")).unwrap();
    assert_eq!(m["cache_hit"], Value::Bool(true));
    let m: Value = serde_json::from_slice(&read("a.json.manifest.json")).unwrap();
    assert_eq!(m["cache_hit"], Value::Bool(false));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"name": "x", "branches": 1}"#).unwrap();
    assert_eq!(pcf(dir.path(), &["info", "--descriptor", "bad.json"]).status.code(), Some(2));
    assert_eq!(pcf(dir.path(), &["info", "--preset", "nope"]).status.code(), Some(2));
    let budget = pcf(dir.path(), &["partition", "--preset", "sg", "--level", "6", "--budget-cells", "100"]);
    assert_eq!(budget.status.code(), Some(3));
    let p = pcf(dir.path(), &["besov-norm", "--preset", "sg", "--level", "2", "--p", "0.5", "--sigma", "0.3", "--seed", "1"]);
    assert_eq!(p.status.code(), Some(2));
    assert_eq!(pcf(dir.path(), &["partition", "--preset", "sg", "--level", "2"]).status.code(), Some(0));
}

#[test]
fn user_descriptor_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let doc = interval_document();
    std::fs::write(dir.path().join("d.json"), doc).unwrap();
    let v: Value = serde_json::from_str(&ok(dir.path(), &["info", "--descriptor", "d.json"])).unwrap();
    assert!((v["d_h"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

/// The unit interval written out by hand.
fn interval_document() -> &'static str {
    r#"{"name": "my-interval", "branches": 2, "v0": 2, "boundary": [0, 1],
        "gluings": [[1, 1, 2, 0]], "r": [0.5, 0.5], "H": [[-1, 1], [1, -1]]}"#
}
