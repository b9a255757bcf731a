use serde_json::Value;

use pcf_besov_web::{classify_point, critical_curve_json, weyl_counts};

#[test]
fn curve_json_has_one_entry_per_p() {
    let v: Value = serde_json::from_str(&critical_curve_json("vicsek", 5, 1.0, 8.0, 6, 7).unwrap()).unwrap();
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 6);
    let ds = v["dims"]["d_s"].as_f64().unwrap();
    for pt in pts {
        let p = pt["p"].as_f64().unwrap();
        assert!((pt["c_hat"].as_f64().unwrap() - (1.0 + (2.0 / p - 1.0) * (ds - 1.0))).abs() < 1e-9);
    }
}

#[test]
fn classification_labels() {
    let v: Value = serde_json::from_str(&classify_point("sg", 2.0, 0.3, 1.0).unwrap()).unwrap();
    assert_eq!(v["region"], "A2");
    let v: Value = serde_json::from_str(&classify_point("sg", 2.0, 0.9, 1.0).unwrap()).unwrap();
    assert_eq!(v["region"], "A1");
}

#[test]
fn weyl_exponent_is_close() {
    let v: Value = serde_json::from_str(&weyl_counts("sg", 6).unwrap()).unwrap();
    let slope = v["fit"]["slope"].as_f64().unwrap();
    let target = v["target"].as_f64().unwrap();
    assert!((slope / target - 1.0).abs() < 0.1);
}
