//! Desk-scale comparison of the heat-proxy norm with the Lipschitz-Besov norm.
//!
//! Ratios are reported as observed minima, maxima and spreads over a seeded
//! family; they are evidence about bounded constants on finite levels, not a
//! statement about the function spaces themselves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::besov::{lambda_norm, lambda_norm_direct_batch, region_classify, NormConfig, Region};
use crate::critical::{fit_line, fit_window};
use crate::error::{Error, Result};
use crate::function::{PiecewiseHarmonic, TentSeries, VertexFunction};
use crate::model::Fractal;
use crate::report::Method;
use crate::spectral::{heat_besov_norm, neumann_eigs, HeatConfig, SpectralData};

pub const DISCLAIMER: &str = "finite-level evidence only: observed ratio ranges on a seeded family, \
not a proof of norm equivalence";

/// Allowed relative change of the spread between consecutive levels.
pub const STABILITY_TOLERANCE: f64 = 0.25;

/// Smallest per-level growth factor that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FamilySpec {
    /// Gaussian values on `V_0` and tent coefficients of level `n` scaled by
    /// `r^{n·decay}`.
    RandomTent { count: usize, seed: u64, decay: f64 },
    /// Harmonic functions with random boundary data plus
    /// `perturbation · r^{n d_W}`-scaled tent noise.
    NearHarmonic { count: usize, seed: u64, perturbation: f64 },
}

impl FamilySpec {
    /// Random tents decaying just fast enough to lie in the space at `σ`.
    pub fn random_tent(fractal: &Fractal, count: usize, seed: u64, sigma: f64) -> Self {
        FamilySpec::RandomTent { count, seed, decay: sigma * fractal.dims().d_w / 2.0 + 0.25 }
    }

    pub fn count(&self) -> usize {
        match *self {
            FamilySpec::RandomTent { count, .. } | FamilySpec::NearHarmonic { count, .. } => count,
        }
    }
}

/// Members of the family on `V_{Λ_m}`. Coefficients are drawn level by
/// level from one stream per member, so level `m + 1` extends level `m`.
pub fn tent_family(fractal: &Fractal, spec: &FamilySpec, m: usize) -> Vec<VertexFunction> {
    let hs = fractal.structure();
    let nb = fractal.descriptor().boundary().len();
    let v0 = hs.v0size();
    let r = fractal.r();
    let d_w = fractal.dims().d_w;
    let (count, seed) = match *spec {
        FamilySpec::RandomTent { count, seed, .. } | FamilySpec::NearHarmonic { count, seed, .. } => (count, seed),
    };
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
            let (f0, amp, decay) = match *spec {
                FamilySpec::RandomTent { decay, .. } => ((0..v0).map(|_| gauss()).collect::<Vec<_>>(), 1.0, decay),
                FamilySpec::NearHarmonic { perturbation, .. } => {
                    let b: Vec<f64> = (0..nb).map(|_| gauss()).collect();
                    (hs.fill(&b), perturbation, d_w)
                }
            };
            let coeffs = (1..=m)
                .map(|n| {
                    let len = fractal.table(n).ring().len();
                    let s = amp * r.powf(n as f64 * decay);
                    (0..len).map(|_| s * gauss()).collect()
                })
                .collect();
            let series = TentSeries { f0, coeffs };
            VertexFunction::new(m, series.partial_sum(fractal, m))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub level: usize,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

impl RatioReport {
    pub fn new(level: usize, ratios: Vec<f64>) -> Self {
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(0.0, f64::max);
        RatioReport { level, ratios, min, max, spread: max / min }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    #[serde(serialize_with = "crate::report::exponent")]
    pub p: f64,
    #[serde(serialize_with = "crate::report::exponent")]
    pub q: f64,
    pub sigma: f64,
    pub c_estimate: f64,
    pub region: Region,
    pub method: Method,
    pub family: FamilySpec,
    pub coarse: RatioReport,
    pub fine: RatioReport,
    /// `spread(m+1)/spread(m) - 1`.
    pub spread_change: f64,
    pub stable: bool,
    pub warnings: Vec<String>,
    pub disclaimer: String,
}

fn spectral(fractal: &Fractal, m: usize) -> Result<SpectralData> {
    neumann_eigs(fractal, m, fractal.table(m).vertex_count())
}

/// Heat-proxy norm over the Λ-norm for each member at level `m`.
#[allow(clippy::too_many_arguments)]
fn ratios_at(
    fractal: &Fractal,
    family: &FamilySpec,
    m: usize,
    method: Method,
    p: f64,
    q: f64,
    sigma: f64,
    heat: HeatConfig,
) -> Result<RatioReport> {
    let spec = spectral(fractal, m)?;
    let fs = tent_family(fractal, family, m);
    let cfg = NormConfig::new(m);
    let mut ratios = Vec::with_capacity(fs.len());
    for f in &fs {
        let b = heat_besov_norm(fractal, &spec, &f.values, p, q, sigma, heat)?.value;
        let ph = PiecewiseHarmonic::from_vertex(fractal.table(m), &f.values)?;
        let l = lambda_norm(fractal, &ph, method, p, q, sigma, cfg)?.value;
        ratios.push(b / l);
    }
    Ok(RatioReport::new(m, ratios))
}

/// Ratio report at `m` and `m + 1`; the Λ side uses the Haar form in `𝒜_2`
/// and the graph form in `𝒜_1` (and, with a warning, elsewhere).
#[allow(clippy::too_many_arguments)]
pub fn equivalence_experiment(
    fractal: &Fractal,
    p: f64,
    q: f64,
    sigma: f64,
    c_estimate: f64,
    family: &FamilySpec,
    m: usize,
    heat: HeatConfig,
) -> Result<EquivalenceReport> {
    if m + 1 > fractal.max_level() {
        return Err(Error::InvalidArgument(format!("level {} is not built", m + 1)));
    }
    let point = region_classify(fractal.dims(), p, sigma, c_estimate)?;
    let mut warnings = Vec::new();
    let method = match point.region {
        Region::A2 => Method::Haar,
        Region::A1 => Method::Graph,
        other => {
            warnings.push(format!("({:.4}, {sigma}) is in region {} rather than below the curve", 1.0 / p, other.label()));
            if sigma < crate::besov::l1(fractal.dims(), p) {
                Method::Haar
            } else {
                Method::Graph
            }
        }
    };
    let coarse = ratios_at(fractal, family, m, method, p, q, sigma, heat)?;
    let fine = ratios_at(fractal, family, m + 1, method, p, q, sigma, heat)?;
    let spread_change = fine.spread / coarse.spread - 1.0;
    Ok(EquivalenceReport {
        p,
        q,
        sigma,
        c_estimate,
        region: point.region,
        method,
        family: *family,
        coarse,
        fine,
        spread_change,
        stable: spread_change.abs() <= STABILITY_TOLERANCE,
        warnings,
        disclaimer: DISCLAIMER.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub p: f64,
    pub sigma: f64,
    pub c_estimate: f64,
    pub level: usize,
    /// Per member, `exp` of the fitted slope of the direct per-level terms.
    pub lambda_growth: Vec<f64>,
    /// Per member, heat-proxy norm at `m` and `m + 1`.
    pub heat_coarse: Vec<f64>,
    pub heat_fine: Vec<f64>,
    /// Largest relative change of the heat norm from `m` to `m + 1`.
    pub heat_change: f64,
    pub fires: bool,
    pub warnings: Vec<String>,
    pub disclaimer: String,
}

/// For `σ` above the curve: the direct Λ terms should grow geometrically in
/// the level while the heat-proxy norm settles. Fires when every member
/// grows by at least [`DIVERGENCE_GROWTH`] per level and no heat norm moves
/// by more than [`STABILITY_TOLERANCE`] from `m` to `m + 1`.
#[allow(clippy::too_many_arguments)]
pub fn divergence_diagnostic(
    fractal: &Fractal,
    p: f64,
    q: f64,
    sigma: f64,
    c_estimate: f64,
    family: &FamilySpec,
    m: usize,
    heat: HeatConfig,
) -> Result<DivergenceReport> {
    if m + 2 > fractal.max_level() {
        return Err(Error::InvalidArgument(format!("levels up to {} are needed", m + 2)));
    }
    let mut warnings = Vec::new();
    if sigma <= c_estimate {
        warnings.push(format!("sigma = {sigma} is not above the curve estimate {c_estimate:.6}"));
    }
    let fine_fs = tent_family(fractal, family, m + 1);
    let cells: Vec<PiecewiseHarmonic> = fine_fs
        .iter()
        .map(|f| PiecewiseHarmonic::from_vertex(fractal.table(m + 1), &f.values))
        .collect::<Result<_>>()?;
    let direct = lambda_norm_direct_batch(fractal, &cells, p, q, sigma, NormConfig::new(m + 1))?;
    let (lo, hi) = fit_window(m + 1);
    let xs: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
    let lambda_growth = direct
        .iter()
        .map(|rep| {
            let ys: Vec<f64> = rep.levels[lo..=hi].iter().map(|t| t.value.ln()).collect();
            fit_line(&xs, &ys).0.exp()
        })
        .collect::<Vec<_>>();
    let heat_at = |level: usize| -> Result<Vec<f64>> {
        let spec = spectral(fractal, level)?;
        tent_family(fractal, family, level)
            .iter()
            .map(|f| Ok(heat_besov_norm(fractal, &spec, &f.values, p, q, sigma, heat)?.value))
            .collect()
    };
    let heat_coarse = heat_at(m)?;
    let heat_fine = heat_at(m + 1)?;
    let heat_change = heat_coarse
        .iter()
        .zip(&heat_fine)
        .map(|(a, b)| (b - a).abs() / a)
        .fold(0.0, f64::max);
    let fires = lambda_growth.iter().all(|&g| g >= DIVERGENCE_GROWTH) && heat_change <= STABILITY_TOLERANCE;
    Ok(DivergenceReport {
        p,
        sigma,
        c_estimate,
        level: m,
        lambda_growth,
        heat_coarse,
        heat_fine,
        heat_change,
        fires,
        warnings,
        disclaimer: DISCLAIMER.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::tent_interpolation;
    use crate::pcf::presets;

    #[test]
    fn families_extend_across_levels() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 4).unwrap();
        let spec = FamilySpec::random_tent(&fr, 3, 11, 0.5);
        let a = tent_family(&fr, &spec, 3);
        let b = tent_family(&fr, &spec, 4);
        for (x, y) in a.iter().zip(&b) {
            let tx = tent_interpolation(&fr, x).unwrap();
            let ty = tent_interpolation(&fr, y).unwrap();
            assert_eq!(tx.f0, ty.f0);
            for n in 0..3 {
                for (u, v) in tx.coeffs[n].iter().zip(&ty.coeffs[n]) {
                    assert!((u - v).abs() < 1e-12);
                }
            }
        }
        assert_ne!(a[0].values, a[1].values);
    }

    #[test]
    fn harmonic_family_has_finite_ratios() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let fam = FamilySpec::NearHarmonic { count: 4, seed: 1, perturbation: 0.0 };
        let rep = equivalence_experiment(&fr, 2.0, 2.0, 0.5, 1.0, &fam, 2, HeatConfig::default()).unwrap();
        assert_eq!(rep.region, Region::A2);
        assert!(rep.coarse.ratios.iter().all(|x| x.is_finite() && *x > 0.0));
        assert!(rep.fine.spread.is_finite());
    }
}
