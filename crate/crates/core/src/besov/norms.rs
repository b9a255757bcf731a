//! Lipschitz-Besov norms on the dyadic grid `t = r^m`, `m = 0..=M`.
//!
//! * direct: `‖f‖_p + ‖r^{-mσd_W/2} I_p(f, r^m)‖_{ℓ^q}`
//! * haar:   `‖r^{-mσd_W/2} ‖Ẽ[f|Λ_m]‖_p‖_{ℓ^q}`, meant for `σ < d_S/p`
//! * graph:  `‖f‖_p + ‖r^{m(1 + d_H/p - σd_W/2)} ‖H_{Λ_m} f‖_{ℓ^p(V_{Λ_m})}‖_{ℓ^q}`,
//!   meant for `σ > d_S/p`
//! * tent:   `‖r^{-mσd_W/2} ‖f_m‖_p‖_{ℓ^q}` over the tent expansion

use crate::besov::ip::{working_values, IpEngine};
use crate::besov::regions::{l1, l2};
use crate::error::{Error, Result};
use crate::function::{conditional_expectation, tent_interpolation, LpNormer, PiecewiseHarmonic, VertexFunction, DEFAULT_DEPTH};
use crate::model::Fractal;
use crate::report::{LevelTerm, Method, SeminormReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormConfig {
    /// Finest grid level `M`.
    pub top: usize,
    /// Vertex level for the direct form; defaults to `max(M + 1, level of f)`
    /// capped at the built maximum.
    pub working_level: Option<usize>,
    /// Sampling depth for `L^p` norms with `p ≠ 2`.
    pub depth: usize,
}

impl NormConfig {
    pub fn new(top: usize) -> Self {
        NormConfig { top, working_level: None, depth: DEFAULT_DEPTH }
    }

    pub fn with_working_level(mut self, level: usize) -> Self {
        self.working_level = Some(level);
        self
    }

    fn check(&self, fractal: &Fractal) -> Result<()> {
        if self.top > fractal.max_level() {
            return Err(Error::InvalidArgument(format!(
                "grid level {} above the built maximum {}",
                self.top,
                fractal.max_level()
            )));
        }
        Ok(())
    }
}

fn check_exponents(p: f64, q: f64, sigma: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= 1.0) || !(sigma >= 0.0) || sigma.is_infinite() {
        return Err(Error::InvalidArgument(format!("need p, q ≥ 1 and finite σ ≥ 0 (p={p}, q={q}, σ={sigma})")));
    }
    Ok(())
}

fn term(index: usize, scale: f64, value: f64) -> LevelTerm {
    LevelTerm { index, scale, value, weight: 1.0 }
}

/// Direct form for several functions sharing one resistance computation.
pub fn lambda_norm_direct_batch(
    fractal: &Fractal,
    fs: &[PiecewiseHarmonic],
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<Vec<SeminormReport>> {
    check_exponents(p, q, sigma)?;
    cfg.check(fractal)?;
    let own = fs.iter().map(|f| f.level()).max().unwrap_or(0);
    let level = cfg.working_level.unwrap_or_else(|| (cfg.top + 1).max(own).min(fractal.max_level()));
    let engine = IpEngine::new(fractal, level)?;
    lambda_norm_direct_with(&engine, fractal, fs, p, q, sigma, cfg)
}

/// Direct form with a prepared engine.
pub fn lambda_norm_direct_with(
    engine: &IpEngine,
    fractal: &Fractal,
    fs: &[PiecewiseHarmonic],
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<Vec<SeminormReport>> {
    check_exponents(p, q, sigma)?;
    cfg.check(fractal)?;
    let level = engine.level();
    let values: Vec<Vec<f64>> = fs.iter().map(|f| working_values(fractal, f, level)).collect();
    let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
    let ips = engine.ip_levels(&refs, p, cfg.top)?;
    let normer = LpNormer::new(fractal, p, cfg.depth);
    let r = fractal.r();
    let e = sigma * fractal.dims().d_w / 2.0;
    let mut out = Vec::with_capacity(fs.len());
    for (f, ip) in fs.iter().zip(ips) {
        let levels = ip
            .iter()
            .enumerate()
            .map(|(m, v)| term(m, r.powi(m as i32), r.powf(-(m as f64) * e) * v))
            .collect();
        let mut rep = SeminormReport::assemble(Method::Direct, p, q, sigma, normer.norm(f), levels);
        rep.depth = Some(cfg.depth);
        if level <= cfg.top {
            rep.warnings.push(format!("working level {level} does not resolve the finest radius r^{}", cfg.top));
        }
        out.push(rep);
    }
    Ok(out)
}

pub fn lambda_norm_direct(
    fractal: &Fractal,
    f: &PiecewiseHarmonic,
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<SeminormReport> {
    Ok(lambda_norm_direct_batch(fractal, std::slice::from_ref(f), p, q, sigma, cfg)?.remove(0))
}

pub fn lambda_norm_haar(
    fractal: &Fractal,
    f: &PiecewiseHarmonic,
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<SeminormReport> {
    check_exponents(p, q, sigma)?;
    cfg.check(fractal)?;
    let g = if f.level() < cfg.top { f.refine(fractal, cfg.top) } else { f.clone() };
    let haar = conditional_expectation(fractal, &g);
    let normer = LpNormer::new(fractal, p, cfg.depth);
    let r = fractal.r();
    let e = sigma * fractal.dims().d_w / 2.0;
    // The mean E[f|Λ_0] plays the role of the L^p part.
    let mean = normer.piecewise_constant_norm(0, &haar.layers[0]);
    let levels = (1..=cfg.top)
        .map(|m| {
            let u = normer.piecewise_constant_norm(m, &haar.layers[m]);
            term(m, r.powi(m as i32), r.powf(-(m as f64) * e) * u)
        })
        .collect();
    let mut rep = SeminormReport::assemble(Method::Haar, p, q, sigma, mean, levels);
    let dims = fractal.dims();
    if !p.is_infinite() && sigma >= l1(dims, p) {
        rep.warnings.push(format!(
            "haar form is only equivalent for sigma < d_S/p = {:.6}",
            l1(dims, p)
        ));
    }
    Ok(rep)
}

fn lp_counting(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn lambda_norm_graph(
    fractal: &Fractal,
    f: &PiecewiseHarmonic,
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<SeminormReport> {
    check_exponents(p, q, sigma)?;
    cfg.check(fractal)?;
    let dims = fractal.dims();
    let mut warnings = Vec::new();
    if !f.is_continuous(fractal.table(f.level())) {
        warnings.push("graph form applied to a discontinuous function; vertex values are averaged".to_string());
    }
    let samples = working_values(fractal, f, cfg.top);
    let r = fractal.r();
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let e = 1.0 + dims.d_h * inv_p - sigma * dims.d_w / 2.0;
    let mut levels = Vec::with_capacity(cfg.top + 1);
    for m in 0..=cfg.top {
        let n = fractal.table(m).vertex_count();
        let hf = fractal.laplacian(m).apply(&samples[..n])?;
        levels.push(term(m, r.powi(m as i32), r.powf(m as f64 * e) * lp_counting(&hf, p)));
    }
    let normer = LpNormer::new(fractal, p, cfg.depth);
    let mut rep = SeminormReport::assemble(Method::Graph, p, q, sigma, normer.norm(f), levels);
    if !p.is_infinite() && sigma <= l1(dims, p) {
        warnings.push(format!("graph form is only equivalent for sigma > d_S/p = {:.6}", l1(dims, p)));
    }
    rep.warnings = warnings;
    rep.depth = Some(cfg.depth);
    Ok(rep)
}

/// Tent form from level-`M` vertex samples.
pub fn lambda_norm_tent(
    fractal: &Fractal,
    f: &PiecewiseHarmonic,
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<SeminormReport> {
    check_exponents(p, q, sigma)?;
    cfg.check(fractal)?;
    let dims = fractal.dims();
    let samples = VertexFunction::new(cfg.top, working_values(fractal, f, cfg.top));
    let series = tent_interpolation(fractal, &samples)?;
    let normer = LpNormer::new(fractal, p, cfg.depth);
    let r = fractal.r();
    let e = sigma * dims.d_w / 2.0;
    // The harmonic part f_0 plays the role of the L^p part.
    let base = normer.norm(&series.component_cells(fractal, 0));
    let levels = (1..=cfg.top)
        .map(|m| {
            let u = normer.norm(&series.component_cells(fractal, m));
            term(m, r.powi(m as i32), r.powf(-(m as f64) * e) * u)
        })
        .collect();
    let mut rep = SeminormReport::assemble(Method::Tent, p, q, sigma, base, levels);
    rep.depth = Some(cfg.depth);
    if !f.is_continuous(fractal.table(f.level())) {
        rep.warnings.push("tent form applied to a discontinuous function; vertex values are averaged".into());
    }
    if !p.is_infinite() && !(sigma > l1(dims, p) && sigma < l2(dims, p)) {
        rep.warnings.push(format!(
            "tent form is only equivalent for d_S/p < sigma < 2 - d_S/p' ({:.6}, {:.6})",
            l1(dims, p),
            l2(dims, p)
        ));
    }
    Ok(rep)
}

/// Dispatch on `method`; the heat form lives with the spectral tools.
pub fn lambda_norm(
    fractal: &Fractal,
    f: &PiecewiseHarmonic,
    method: Method,
    p: f64,
    q: f64,
    sigma: f64,
    cfg: NormConfig,
) -> Result<SeminormReport> {
    match method {
        Method::Direct => lambda_norm_direct(fractal, f, p, q, sigma, cfg),
        Method::Haar => lambda_norm_haar(fractal, f, p, q, sigma, cfg),
        Method::Graph => lambda_norm_graph(fractal, f, p, q, sigma, cfg),
        Method::Tent => lambda_norm_tent(fractal, f, p, q, sigma, cfg),
        Method::Heat => Err(Error::InvalidArgument("the heat form needs spectral data".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{extend_cells, harmonic_extend};
    use crate::pcf::presets;

    fn constant(fr: &Fractal, m: usize, c: f64) -> PiecewiseHarmonic {
        let n = fr.table(m).cell_count();
        PiecewiseHarmonic::piecewise_constant(m, fr.descriptor().v0size(), &vec![c; n])
    }

    #[test]
    fn constants_have_zero_seminorm() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 4).unwrap();
        let f = constant(&fr, 2, -1.5);
        let cfg = NormConfig::new(3);
        for method in [Method::Direct, Method::Graph, Method::Haar, Method::Tent] {
            for q in [2.0, f64::INFINITY] {
                let rep = lambda_norm(&fr, &f, method, 3.0, q, 0.5, cfg).unwrap();
                assert!(rep.seminorm.abs() < 1e-12, "{method:?}");
                assert!((rep.value - 1.5).abs() < 1e-12, "{method:?}");
            }
        }
    }

    #[test]
    fn single_haar_layer() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        // Zero mean inside every level-1 cell.
        let c: Vec<f64> = (0..9).map(|k| [1.0, -0.5, -0.5][k % 3] * (1.0 + (k / 3) as f64)).collect();
        let f = PiecewiseHarmonic::piecewise_constant(2, 3, &c);
        let (p, sigma) = (1.5, 0.3);
        let rep = lambda_norm_haar(&fr, &f, p, f64::INFINITY, sigma, NormConfig::new(3)).unwrap();
        let normer = LpNormer::new(&fr, p, 3);
        let expect = fr.r().powf(-2.0 * sigma * fr.dims().d_w / 2.0) * normer.piecewise_constant_norm(2, &c);
        assert!((rep.value - expect).abs() < 1e-12 * expect);
        assert!(rep.warnings.is_empty());
    }

    #[test]
    fn harmonic_graph_terms_live_on_the_boundary() {
        let fr = Fractal::new(&presets::vicsek(), 4).unwrap();
        let h = harmonic_extend(&fr, &[1.0, 0.3, -0.2, 0.7], 0).unwrap();
        let f = PiecewiseHarmonic::from_cells(0, 5, h.values.clone());
        let (p, sigma) = (2.0, 1.0);
        let rep = lambda_norm_graph(&fr, &f, p, 2.0, sigma, NormConfig::new(4)).unwrap();
        let dims = fr.dims();
        let rate = fr.r().powf(1.0 + dims.d_h / p - sigma * dims.d_w / 2.0);
        for m in 1..=4 {
            let ratio = rep.levels[m].value / rep.levels[m - 1].value;
            assert!((ratio - rate).abs() < 1e-9, "m={m}: {ratio} vs {rate}");
            let v = working_values(&fr, &f, m);
            let hf = fr.laplacian(m).apply(&v).unwrap();
            assert!(hf[4..].iter().all(|x| x.abs() < 1e-9));
        }
        let tent = lambda_norm_tent(&fr, &f, p, 2.0, sigma, NormConfig::new(4)).unwrap();
        assert!(tent.levels.iter().all(|t| t.value < 1e-12));
    }

    #[test]
    fn direct_scales_with_sigma_and_amplitude() {
        let fr = Fractal::new(&presets::interval(), 6).unwrap();
        let x = extend_cells(&fr, &[0.0, 1.0], 0);
        let cfg = NormConfig::new(5);
        let a = lambda_norm_direct(&fr, &x, 2.0, 2.0, 0.4, cfg).unwrap();
        let b = lambda_norm_direct(&fr, &x.scaled(-3.0), 2.0, 2.0, 0.4, cfg).unwrap();
        assert!((b.value - 3.0 * a.value).abs() < 1e-12 * b.value);
        let c = lambda_norm_direct(&fr, &x, 2.0, 2.0, 0.6, cfg).unwrap();
        let r = fr.r();
        for m in 0..=5 {
            let factor = r.powf(-(m as f64) * 0.2 * 2.0 / 2.0);
            assert!((c.levels[m].value - factor * a.levels[m].value).abs() < 1e-13);
        }
        assert!(a.recombination_error() < 1e-12);
    }
}
