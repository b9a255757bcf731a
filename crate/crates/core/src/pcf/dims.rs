use serde::Serialize;

use crate::pcf::FractalDescriptor;

/// Hausdorff, walk and spectral dimension under the resistance metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dimensions {
    pub d_h: f64,
    pub d_w: f64,
    pub d_s: f64,
}

impl Dimensions {
    pub fn from_hausdorff(d_h: f64) -> Self {
        let d_w = 1.0 + d_h;
        Dimensions { d_h, d_w, d_s: 2.0 * d_h / d_w }
    }

    pub fn of(desc: &FractalDescriptor) -> Self {
        Self::from_hausdorff(solve_hausdorff_dimension(desc.weights()))
    }
}

/// Unique `s > 0` with `Σ r_i^s = 1`.
///
/// Panics unless every weight lies in `(0, 1)` and there are at least two.
pub fn solve_hausdorff_dimension(r: &[f64]) -> f64 {
    assert!(r.len() >= 2 && r.iter().all(|&x| x > 0.0 && x < 1.0), "weights must lie in (0, 1)");
    let f = |s: f64| r.iter().map(|x| x.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-14 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let df: f64 = r.iter().map(|x| x.powf(s) * x.ln()).sum();
    let polished = s - f(s) / df;
    if polished.is_finite() && f(polished).abs() <= f(s).abs() {
        polished
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((solve_hausdorff_dimension(&[0.5, 0.5]) - 1.0).abs() < 1e-14);
        let v = solve_hausdorff_dimension(&[1.0 / 3.0; 5]);
        assert!((v - 5f64.ln() / 3f64.ln()).abs() < 1e-13);
        let sg = solve_hausdorff_dimension(&[0.6; 3]);
        assert!((sg - 3f64.ln() / (5f64.ln() - 3f64.ln())).abs() < 1e-13);
    }

    #[test]
    fn residual_is_tiny() {
        let r = [0.3, 0.45, 0.7, 0.2];
        let s = solve_hausdorff_dimension(&r);
        let sum: f64 = r.iter().map(|x| x.powf(s)).sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectral_dimension_identity() {
        let d = Dimensions::from_hausdorff(1.7);
        assert_eq!(d.d_s, 2.0 * d.d_h / d.d_w);
    }
}
