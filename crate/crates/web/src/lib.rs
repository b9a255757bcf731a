//! Browser bindings: the critical curve, region classification and the
//! eigenvalue counting function, each returning JSON.

use serde_json::json;
use wasm_bindgen::prelude::*;

use pcf_besov::besov::{critical_bounds, l1, l2, region_classify};
use pcf_besov::critical::{bounds_check, critical_curve, p_grid};
use pcf_besov::pcf::{presets, Dimensions};
use pcf_besov::spectral::{mass_matrix, weyl_slope};
use pcf_besov::Fractal;

/// Levels above this take too long for an interactive page.
const MAX_LEVEL: usize = 8;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn fractal(preset: &str, level: usize) -> Result<Fractal, JsValue> {
    if level > MAX_LEVEL {
        return Err(fail(format!("level {level} is above the demo limit {MAX_LEVEL}")));
    }
    let desc = presets::by_name(preset).map_err(fail)?;
    Fractal::new(&desc, level).map_err(fail)
}

/// Curve estimate on a log grid of `p`, with the lines and the sandwich
/// bounds at each point.
#[wasm_bindgen]
pub fn critical_curve_json(preset: &str, levels: usize, pmin: f64, pmax: f64, pcount: usize, seed: u32) -> Result<String, JsValue> {
    let fr = fractal(preset, levels)?;
    let est = critical_curve(&fr, &p_grid(pmin, pmax, pcount.max(1)), levels, u64::from(seed)).map_err(fail)?;
    let dims = est.dims;
    let points: Vec<_> = est
        .points
        .iter()
        .map(|c| {
            let (lo, hi) = critical_bounds(dims, c.p);
            json!({
                "p": c.p, "inv_p": c.inv_p, "c_hat": c.c_hat, "c_lo": c.c_lo, "c_hi": c.c_hi,
                "l1": dims.d_s / c.p, "l2": 2.0 - dims.d_s * (1.0 - c.inv_p),
                "bound_lo": lo, "bound_hi": hi,
            })
        })
        .collect();
    let checks = bounds_check(&est);
    Ok(json!({"dims": dims, "points": points, "checks": checks.checks}).to_string())
}

/// Region of `(1/p, σ)` given a curve value at `p`.
#[wasm_bindgen]
pub fn classify_point(preset: &str, p: f64, sigma: f64, c_hat: f64) -> Result<String, JsValue> {
    let dims = Dimensions::of(&presets::by_name(preset).map_err(fail)?);
    let pt = region_classify(dims, p, sigma, c_hat).map_err(fail)?;
    Ok(json!({"region": pt.region.label(), "inv_p": pt.inv_p, "sigma": sigma, "l1": l1(dims, p), "l2": l2(dims, p)}).to_string())
}

/// `N(λ)` on the fitting window and the fitted Weyl exponent.
#[wasm_bindgen]
pub fn weyl_counts(preset: &str, level: usize) -> Result<String, JsValue> {
    let fr = fractal(preset, level)?;
    let fit = weyl_slope(&fr.laplacian(level), &mass_matrix(&fr, level)).map_err(fail)?;
    Ok(json!({"fit": fit, "target": fr.dims().d_s / 2.0}).to_string())
}
