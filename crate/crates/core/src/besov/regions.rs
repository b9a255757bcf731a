//! Critical lines and regions of the `(1/p, σ)` plane.
//!
//! `ℒ1(p) = d_S/p`, `ℒ2(p) = 2 - d_S/p'`. Below the critical curve `𝒞`,
//! `𝒜_1` lies above `ℒ1` and `𝒜_2` below it; `ℬ` is the strip between the
//! two lines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pcf::Dimensions;

/// Half-width of the band treated as lying on `ℒ1`.
pub const BORDER_TOLERANCE: f64 = 1e-9;

pub fn l1(dims: Dimensions, p: f64) -> f64 {
    dims.d_s / p
}

pub fn l2(dims: Dimensions, p: f64) -> f64 {
    2.0 - dims.d_s * (1.0 - 1.0 / p)
}

/// Lower and upper bounds for `𝒞(p)`: `[1, 1 + (2/p - 1)(d_S - 1)]` for
/// `p ≤ 2`, `[1 + (2/p - 1)(d_S - 1), 1 ∧ (2/d_W + d_S/p)]` for `p ≥ 2`.
pub fn critical_bounds(dims: Dimensions, p: f64) -> (f64, f64) {
    let inv = 1.0 / p;
    let chord = 1.0 + (2.0 * inv - 1.0) * (dims.d_s - 1.0);
    if p <= 2.0 {
        (1.0, chord)
    } else {
        (chord, (2.0 / dims.d_w + dims.d_s * inv).min(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    A1,
    A2,
    /// Between the lines but not below `𝒞`.
    B,
    AboveC,
    OnBorder,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::A1 => "A1",
            Region::A2 => "A2",
            Region::B => "B",
            Region::AboveC => "above-C",
            Region::OnBorder => "on-border",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub inv_p: f64,
    pub sigma: f64,
    pub region: Region,
}

/// Classify `(1/p, σ)` against the lines and a value `c_hat` of the curve at `p`.
pub fn region_classify(dims: Dimensions, p: f64, sigma: f64, c_hat: f64) -> Result<RegionPoint> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in (1, ∞)")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma = {sigma} must be positive")));
    }
    let a = l1(dims, p);
    let region = if (sigma - a).abs() <= BORDER_TOLERANCE * a.max(1.0) {
        Region::OnBorder
    } else if sigma < c_hat {
        if sigma < a {
            Region::A2
        } else {
            Region::A1
        }
    } else if sigma > a && sigma < l2(dims, p) {
        Region::B
    } else {
        Region::AboveC
    };
    Ok(RegionPoint { inv_p: 1.0 / p, sigma, region })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub inv_p: f64,
    pub l1: f64,
    pub l2: f64,
    pub c_hat: f64,
    pub c_lower: f64,
    pub c_upper: f64,
}

/// One row per `1/p` in `inv_p` (values in `[0, 1]`, `0` meaning `p = ∞`),
/// with the curve estimate supplied per row.
pub fn region_curves(dims: Dimensions, inv_p: &[f64], c_hat: &[f64]) -> Result<Vec<CurveRow>> {
    if inv_p.len() != c_hat.len() {
        return Err(Error::DimensionMismatch { expected: inv_p.len(), got: c_hat.len() });
    }
    inv_p
        .iter()
        .zip(c_hat)
        .map(|(&s, &c)| {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!("1/p = {s} outside [0, 1]")));
            }
            let p = 1.0 / s;
            let (c_lower, c_upper) = critical_bounds(dims, p);
            Ok(CurveRow { inv_p: s, l1: dims.d_s * s, l2: 2.0 - dims.d_s * (1.0 - s), c_hat: c, c_lower, c_upper })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf::{presets, Dimensions};

    fn sg() -> Dimensions {
        Dimensions::of(&presets::sierpinski_gasket())
    }

    #[test]
    fn gasket_points() {
        let d = sg();
        assert_eq!(region_classify(d, 2.0, 0.5, 1.0).unwrap().region, Region::A2);
        assert_eq!(region_classify(d, 2.0, 0.9, 1.0).unwrap().region, Region::A1);
        assert_eq!(region_classify(d, 2.0, 1.05, 1.0).unwrap().region, Region::B);
        assert_eq!(region_classify(d, 2.0, 1.9, 1.0).unwrap().region, Region::AboveC);
        for p in [1.2, 2.0, 5.0] {
            assert_eq!(region_classify(d, p, l1(d, p), 1.0).unwrap().region, Region::OnBorder);
        }
        assert!(region_classify(d, 1.0, 0.5, 1.0).is_err());
        assert!(region_classify(d, f64::INFINITY, 0.5, 1.0).is_err());
    }

    #[test]
    fn bounds_meet_at_two_and_infinity() {
        let d = sg();
        assert_eq!(critical_bounds(d, 2.0), (1.0, 1.0));
        let rows = region_curves(d, &[0.0, 0.5, 1.0], &[0.0; 3]).unwrap();
        assert!((rows[0].c_lower - 2.0 / d.d_w).abs() < 1e-15);
        assert!((rows[0].c_upper - 2.0 / d.d_w).abs() < 1e-15);
        assert!((rows[2].c_upper - d.d_s).abs() < 1e-15);
        assert!((rows[1].l1 - d.d_s / 2.0).abs() < 1e-15);
        let interval = Dimensions::of(&presets::interval());
        for s in [0.0, 0.3, 0.5, 0.8, 1.0] {
            let (lo, hi) = critical_bounds(interval, 1.0 / s);
            assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        }
    }
}
