use crate::error::{Error, Result};
use crate::spectral::SpectralData;

/// `P_t f = Σ_j e^{-λ_j t} ⟨f, φ_j⟩_M φ_j` over the stored pairs.
pub fn heat_apply(spec: &SpectralData, f: &[f64], t: f64) -> Result<Vec<f64>> {
    if f.len() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: f.len() });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("heat time must be nonnegative".into()));
    }
    let c = spec.coefficients(f);
    let damped: Vec<f64> = c.iter().zip(&spec.values).map(|(c, l)| c * (-l * t).exp()).collect();
    Ok(spec.synthesize(&damped))
}

/// `(tΔ)^k P_t f`, up to the sign `(-1)^k`.
pub fn heat_derivative(spec: &SpectralData, coeffs: &[f64], t: f64, k: u32) -> Vec<f64> {
    let c: Vec<f64> = coeffs
        .iter()
        .zip(&spec.values)
        .map(|(c, &l)| c * (t * l).powi(k as i32) * (-l * t).exp())
        .collect();
    spec.synthesize(&c)
}

/// `(Σ_x M(x) |f(x)|^p)^{1/p}`, or the maximum for `p = ∞`.
pub fn vertex_lp(mass: &[f64], f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    }
    let s: f64 = mass.iter().zip(f).map(|(m, x)| m * x.abs().powf(p)).sum();
    s.powf(1.0 / p)
}
