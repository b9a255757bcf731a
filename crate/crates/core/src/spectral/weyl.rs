//! Eigenvalue counting and the Weyl exponent `d_S/2`.

use serde::Serialize;

use crate::critical::fit_line;
use crate::error::{Error, Result};
use crate::laplacian::GraphOperator;
use crate::spectral::{bisect_count, count_below};

pub const WEYL_SAMPLES: usize = 81;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylFit {
    pub lambda_1: f64,
    pub lambda_max: f64,
    /// Fitting range of `λ`.
    pub window: (f64, f64),
    pub slope: f64,
    pub residual: f64,
    /// `(λ, N(λ))` on the log-spaced sample.
    pub samples: Vec<(f64, usize)>,
}

/// `N(λ)` for each `λ`.
pub fn weyl_counts(op: &GraphOperator, mass: &[f64], lambdas: &[f64]) -> Result<Vec<usize>> {
    lambdas.iter().map(|&l| count_below(op, mass, l)).collect()
}

/// Range of `λ` used for the log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeylWindow {
    /// The decade `[g/√10, g√10]` around `g = √(λ_1 λ_max)`.
    MiddleDecade,
    /// `[λ_1, λ_max]` in log scale with the given fraction cut from each end.
    /// Needed when the counting function oscillates with a log-period longer
    /// than a decade (Vicsek: a factor 15 per level).
    Trimmed(f64),
}

/// Slope of `ln N` against `ln λ` over the middle decade of the spectrum.
pub fn weyl_slope(op: &GraphOperator, mass: &[f64]) -> Result<WeylFit> {
    weyl_slope_with(op, mass, WeylWindow::MiddleDecade)
}

pub fn weyl_slope_with(op: &GraphOperator, mass: &[f64], how: WeylWindow) -> Result<WeylFit> {
    let n = op.n();
    let lambda_1 = bisect_count(op, mass, 2, 1e-6)?;
    let lambda_max = bisect_count(op, mass, n, 1e-6)?;
    let window = match how {
        WeylWindow::MiddleDecade => {
            let g = (lambda_1 * lambda_max).sqrt();
            let half = 10f64.sqrt();
            (g / half, g * half)
        }
        WeylWindow::Trimmed(cut) => {
            if !(0.0..0.5).contains(&cut) {
                return Err(Error::InvalidArgument(format!("trim fraction {cut} outside [0, 0.5)")));
            }
            let (a, b) = (lambda_1.ln(), lambda_max.ln());
            ((a + cut * (b - a)).exp(), (b - cut * (b - a)).exp())
        }
    };
    let lambdas: Vec<f64> = (0..WEYL_SAMPLES)
        .map(|k| (window.0.ln() + (window.1.ln() - window.0.ln()) * k as f64 / (WEYL_SAMPLES - 1) as f64).exp())
        .collect();
    let counts = weyl_counts(op, mass, &lambdas)?;
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let (slope, residual) = fit_line(&xs, &ys);
    Ok(WeylFit { lambda_1, lambda_max, window, slope, residual, samples: lambdas.into_iter().zip(counts).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Fractal;
    use crate::pcf::presets;
    use crate::spectral::mass_matrix;

    #[test]
    fn counts_are_monotone() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let op = fr.laplacian(3);
        let mass = mass_matrix(&fr, 3);
        let c = weyl_counts(&op, &mass, &[1.0, 10.0, 100.0, 1000.0, 1e6]).unwrap();
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c[0], 1);
        assert_eq!(*c.last().unwrap(), op.n());
    }
}
