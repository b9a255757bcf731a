//! Heat-semigroup Besov norm on the spectral proxy.
//!
//! `‖f‖_{p,M} + ‖t^{-σ/2} ‖(tΔ)^k P_t f‖_{p,M}‖_{L^q_*}` with the time integral
//! replaced by the grid `t_j = r^{j d_W/ρ}`, `j = 0..=mρ`, which covers
//! `[r^{m d_W}, 1]` with step `d_W ln(1/r)/ρ` in `ln t`.

use crate::error::{Error, Result};
use crate::model::Fractal;
use crate::report::{LevelTerm, Method, SeminormReport};
use crate::spectral::{heat_derivative, vertex_lp, SpectralData};

/// Grid points per level unless overridden.
pub const DEFAULT_STEPS_PER_LEVEL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeatConfig {
    /// `ρ`: grid points per factor `r^{d_W}` in time.
    pub steps_per_level: usize,
    /// Number of levels `m` spanned by the grid; defaults to the level of the
    /// spectral data.
    pub levels: Option<usize>,
    /// Derivative order; defaults to the smallest integer above `σ/2`.
    pub k: Option<u32>,
}

impl Default for HeatConfig {
    fn default() -> Self {
        HeatConfig { steps_per_level: DEFAULT_STEPS_PER_LEVEL, levels: None, k: None }
    }
}

/// Smallest integer `k > σ/2`.
pub fn minimal_order(sigma: f64) -> u32 {
    (sigma / 2.0).floor() as u32 + 1
}

pub fn heat_grid(fractal: &Fractal, levels: usize, steps_per_level: usize) -> Vec<f64> {
    let step = fractal.dims().d_w * fractal.r().ln() / steps_per_level as f64;
    (0..=levels * steps_per_level).map(|j| (j as f64 * step).exp()).collect()
}

pub fn heat_besov_norm(
    fractal: &Fractal,
    spec: &SpectralData,
    f: &[f64],
    p: f64,
    q: f64,
    sigma: f64,
    cfg: HeatConfig,
) -> Result<SeminormReport> {
    if f.len() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: f.len() });
    }
    if !(p >= 1.0) || !(q >= 1.0) || !(sigma > 0.0 && sigma.is_finite()) || cfg.steps_per_level == 0 {
        return Err(Error::InvalidArgument(format!("need p, q ≥ 1, σ > 0, ρ ≥ 1 (p={p}, q={q}, σ={sigma})")));
    }
    let k = cfg.k.unwrap_or_else(|| minimal_order(sigma));
    if !(k as f64 > sigma / 2.0) {
        return Err(Error::InvalidArgument(format!("order k = {k} must exceed σ/2")));
    }
    let levels = cfg.levels.unwrap_or(spec.level);
    let grid = heat_grid(fractal, levels, cfg.steps_per_level);
    let weight = if q.is_infinite() {
        1.0
    } else {
        fractal.dims().d_w * (1.0 / fractal.r()).ln() / cfg.steps_per_level as f64
    };
    let coeffs = spec.coefficients(f);
    let terms = grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let u = heat_derivative(spec, &coeffs, t, k);
            LevelTerm { index: j, scale: t, value: t.powf(-sigma / 2.0) * vertex_lp(&spec.mass, &u, p), weight }
        })
        .collect();
    let mut rep = SeminormReport::assemble(Method::Heat, p, q, sigma, vertex_lp(&spec.mass, f, p), terms);
    if spec.count() < spec.n() {
        rep.warnings.push(format!("truncated expansion: {} of {} eigenpairs", spec.count(), spec.n()));
    }
    if cfg.k.is_some_and(|kk| kk != minimal_order(sigma)) {
        rep.warnings.push(format!("non-minimal derivative order k = {k}"));
    }
    Ok(rep)
}

/// Relative change of the norm when the grid step is halved.
pub fn grid_halving_change(
    fractal: &Fractal,
    spec: &SpectralData,
    f: &[f64],
    p: f64,
    q: f64,
    sigma: f64,
    cfg: HeatConfig,
) -> Result<f64> {
    let a = heat_besov_norm(fractal, spec, f, p, q, sigma, cfg)?.value;
    let fine = HeatConfig { steps_per_level: 2 * cfg.steps_per_level, ..cfg };
    let b = heat_besov_norm(fractal, spec, f, p, q, sigma, fine)?.value;
    Ok((b - a).abs() / a.abs().max(f64::MIN_POSITIVE))
}
