//! Critical curve estimates from edge-sum growth of harmonic functions.
//!
//! For harmonic `h`, `S_{m,p}(h) = Σ_{w∈Λ_m} Σ_{H_ab>0} |h(F_w a) - h(F_w b)|^p`
//! grows like `λ_p^m`. Requiring `r^{-mσd_W/2} (r^{m d_H} S_{m,p})^{1/p}` to stay
//! bounded gives `𝒞̂(p) = (2/d_W)(d_H/p - ln λ_p / (p ln(1/r)))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::besov::{critical_bounds, IpEngine};
use crate::error::{Error, Result};
use crate::function::{PiecewiseHarmonic, VertexFunction};
use crate::model::Fractal;
use crate::par::map_blocks;
use crate::pcf::Dimensions;

/// Random harmonic directions added to the boundary basis.
pub const RANDOM_DIRECTIONS: usize = 50;

/// Allowed deviation of `𝒞̂(2)` from 1.
pub const C2_TOLERANCE: f64 = 0.02;

/// `S_{m,p}` for a harmonic function given on the vertices of level `m`.
pub fn edge_sum(fractal: &Fractal, h: &VertexFunction, p: f64) -> Result<f64> {
    let table = fractal.table(h.level);
    if h.values.len() != table.vertex_count() {
        return Err(Error::DimensionMismatch { expected: table.vertex_count(), got: h.values.len() });
    }
    let edges = fractal.descriptor().edges();
    let mut s = 0.0;
    for k in 0..table.cell_count() {
        let cell = table.cell(k);
        for &(a, b) in &edges {
            s += (h.values[cell[a] as usize] - h.values[cell[b] as usize]).abs().powf(p);
        }
    }
    Ok(s)
}

fn cell_edge_sums(cells: &PiecewiseHarmonic, edges: &[(usize, usize)], ps: &[f64], out: &mut [f64]) {
    for k in 0..cells.cell_count() {
        let v = cells.cell(k);
        for &(a, b) in edges {
            let d = (v[a] - v[b]).abs();
            for (o, &p) in out.iter_mut().zip(ps) {
                *o += if p == 1.0 {
                    d
                } else if p == 2.0 {
                    d * d
                } else {
                    d.powf(p)
                };
            }
        }
    }
}

/// Boundary data of the basis functions followed by seeded random unit
/// combinations.
pub fn harmonic_directions(boundary: usize, seed: u64, extra: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..boundary)
        .map(|j| (0..boundary).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let v: Vec<f64> = (0..boundary).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(v.iter().map(|x| x / n).collect());
    }
    out
}

/// `S_{m,p}` for `m = 0..=top`, indexed `[p][direction][m]`.
pub fn edge_sum_table(fractal: &Fractal, directions: &[Vec<f64>], ps: &[f64], top: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    if top > fractal.max_level() {
        return Err(Error::InvalidArgument(format!("level {top} above the built maximum {}", fractal.max_level())));
    }
    let edges = fractal.descriptor().edges();
    let hs = fractal.structure();
    let v0 = hs.v0size();
    let per_dir = map_blocks(directions.len(), |d| {
        // sums[m * np + i]
        let mut sums = vec![0.0; (top + 1) * ps.len()];
        let mut cells = PiecewiseHarmonic::from_cells(0, v0, hs.fill(&directions[d]));
        for m in 0..=top {
            if m > 0 {
                cells = cells.refine(fractal, m);
            }
            cell_edge_sums(&cells, &edges, ps, &mut sums[m * ps.len()..(m + 1) * ps.len()]);
        }
        sums
    });
    Ok((0..ps.len())
        .map(|i| per_dir.iter().map(|s| (0..=top).map(|m| s[m * ps.len() + i]).collect()).collect())
        .collect())
}

/// Least-squares line through `(x_k, y_k)`: slope and RMS residual.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

/// Fit window `[⌈M/2⌉, M]`.
pub fn fit_window(top: usize) -> (usize, usize) {
    (top.div_ceil(2), top)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub p: f64,
    pub lambda: f64,
    /// Smallest and largest consecutive ratio over the window.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub fit_residual: f64,
    pub direction: usize,
    pub window: (usize, usize),
    /// `S_{m,p}` of the maximizing direction, `m = 0..=M`.
    pub sums: Vec<f64>,
}

fn growth_from_sums(p: f64, table: &[Vec<f64>], top: usize) -> Option<GrowthEstimate> {
    let (lo, hi) = fit_window(top);
    let xs: Vec<f64> = (lo..=hi).map(|m| m as f64).collect();
    let mut best: Option<(f64, f64, usize)> = None;
    for (d, s) in table.iter().enumerate() {
        if s[lo..=hi].iter().any(|&v| !(v > 0.0)) {
            continue;
        }
        let ys: Vec<f64> = s[lo..=hi].iter().map(|v| v.ln()).collect();
        let (slope, res) = fit_line(&xs, &ys);
        if best.is_none_or(|b| slope > b.0) {
            best = Some((slope, res, d));
        }
    }
    let (slope, fit_residual, direction) = best?;
    let s = &table[direction];
    let ratios: Vec<f64> = (lo..hi).map(|m| s[m + 1] / s[m]).collect();
    let lambda = slope.exp();
    let lambda_lo = ratios.iter().copied().fold(lambda, f64::min);
    let lambda_hi = ratios.iter().copied().fold(lambda, f64::max);
    Some(GrowthEstimate { p, lambda, lambda_lo, lambda_hi, fit_residual, direction, window: (lo, hi), sums: s.clone() })
}

fn check_growth_inputs(fractal: &Fractal, top: usize) -> Result<()> {
    if fractal.descriptor().boundary().len() < 2 {
        return Err(Error::DegenerateHarmonicSpace);
    }
    if top < 2 {
        return Err(Error::InvalidArgument("growth fits need at least three levels".into()));
    }
    Ok(())
}

/// Maximal growth factor of `S_{m,p}` over the harmonic directions.
pub fn growth_exponent(fractal: &Fractal, p: f64, top: usize, seed: u64) -> Result<GrowthEstimate> {
    check_growth_inputs(fractal, top)?;
    let dirs = harmonic_directions(fractal.descriptor().boundary().len(), seed, RANDOM_DIRECTIONS);
    let table = edge_sum_table(fractal, &dirs, &[p], top)?;
    growth_from_sums(p, &table[0], top).ok_or(Error::DegenerateHarmonicSpace)
}

/// `𝒞̂(p)` for a given growth factor.
pub fn critical_value(dims: Dimensions, r: f64, p: f64, lambda: f64) -> f64 {
    (2.0 / dims.d_w) * (dims.d_h / p - lambda.ln() / (p * (1.0 / r).ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub inv_p: f64,
    pub lambda_hat: f64,
    pub c_hat: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub fit_residual: f64,
    pub growth: GrowthEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveEstimate {
    pub dims: Dimensions,
    pub r: f64,
    pub top: usize,
    pub seed: u64,
    pub directions: usize,
    pub points: Vec<CurvePoint>,
}

impl CurveEstimate {
    /// Linear interpolation in `1/p`, constant beyond the grid.
    pub fn interpolate(&self, p: f64) -> f64 {
        let s = 1.0 / p;
        let mut pts: Vec<(f64, f64)> = self.points.iter().map(|c| (c.inv_p, c.c_hat)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if s <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            if s <= w[1].0 {
                let t = (s - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + t * (w[1].1 - w[0].1);
            }
        }
        pts[pts.len() - 1].1
    }

    pub fn point(&self, p: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|c| (c.p - p).abs() <= 1e-12 * p)
    }
}

/// `n` values of `p` log-spaced on `[pmin, pmax]`.
pub fn p_grid(pmin: f64, pmax: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![pmin];
    }
    (0..n)
        .map(|k| (pmin.ln() + (pmax.ln() - pmin.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn critical_curve(fractal: &Fractal, ps: &[f64], top: usize, seed: u64) -> Result<CurveEstimate> {
    check_growth_inputs(fractal, top)?;
    if ps.is_empty() || ps.iter().any(|&p| !(1.0..=64.0).contains(&p)) {
        return Err(Error::InvalidArgument("p grid must be nonempty and inside [1, 64]".into()));
    }
    let dirs = harmonic_directions(fractal.descriptor().boundary().len(), seed, RANDOM_DIRECTIONS);
    let table = edge_sum_table(fractal, &dirs, ps, top)?;
    let dims = fractal.dims();
    let r = fractal.r();
    let mut points = Vec::with_capacity(ps.len());
    for (&p, t) in ps.iter().zip(&table) {
        let g = growth_from_sums(p, t, top).ok_or(Error::DegenerateHarmonicSpace)?;
        points.push(CurvePoint {
            p,
            inv_p: 1.0 / p,
            lambda_hat: g.lambda,
            c_hat: critical_value(dims, r, p, g.lambda),
            c_lo: critical_value(dims, r, p, g.lambda_hi),
            c_hi: critical_value(dims, r, p, g.lambda_lo),
            fit_residual: g.fit_residual,
            growth: g,
        });
    }
    Ok(CurveEstimate { dims, r, top, seed, directions: dirs.len(), points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest violation beyond the allowed tolerance (0 when passed).
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub checks: Vec<Check>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const ABS_SLACK: f64 = 1e-9;

struct Tally {
    name: &'static str,
    excess: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, excess: 0.0 }
    }

    /// Record `lhs ≤ rhs + tol`.
    fn le(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.excess = self.excess.max(lhs - rhs - tol);
    }

    fn finish(self) -> Check {
        Check { name: self.name.to_string(), passed: self.excess <= 0.0, excess: self.excess.max(0.0) }
    }
}

/// Structural checks on a curve: value 1 at `p = 2`, monotone and concave in
/// `1/p`, the two sandwiches, and the large-`p` limit `2/d_W`. Each check is
/// allowed the bracket widths of the points it involves.
pub fn bounds_check(est: &CurveEstimate) -> BoundsReport {
    let dims = est.dims;
    let mut pts: Vec<&CurvePoint> = est.points.iter().collect();
    pts.sort_by(|a, b| a.inv_p.total_cmp(&b.inv_p));
    let width = |c: &CurvePoint| (c.c_hi - c.c_lo).abs() + ABS_SLACK;
    let mut checks = Vec::new();

    let mut at2 = Tally::new("value_at_2");
    match est.point(2.0) {
        Some(c) => at2.le((c.c_hat - 1.0).abs(), 0.0, C2_TOLERANCE),
        None => at2.excess = f64::INFINITY,
    }
    checks.push(at2.finish());

    let mut mono = Tally::new("monotone");
    for w in pts.windows(2) {
        mono.le(w[0].c_hat, w[1].c_hat, width(w[0]) + width(w[1]));
    }
    checks.push(mono.finish());

    let mut conc = Tally::new("concave");
    for w in pts.windows(3) {
        let t = (w[1].inv_p - w[0].inv_p) / (w[2].inv_p - w[0].inv_p);
        let chord = w[0].c_hat + t * (w[2].c_hat - w[0].c_hat);
        conc.le(chord, w[1].c_hat, width(w[0]) + width(w[1]) + width(w[2]));
    }
    checks.push(conc.finish());

    let mut low = Tally::new("sandwich_p_le_2");
    let mut high = Tally::new("sandwich_p_ge_2");
    for c in &pts {
        let (lo, hi) = critical_bounds(dims, c.p);
        let tally = if c.p <= 2.0 { &mut low } else { &mut high };
        tally.le(lo, c.c_hat, width(c));
        tally.le(c.c_hat, hi, width(c));
    }
    checks.push(low.finish());
    checks.push(high.finish());

    let mut limit = Tally::new("large_p_limit");
    if let Some(c) = pts.first() {
        limit.le((c.c_hat - 2.0 / dims.d_w).abs(), 0.0, dims.d_s / c.p + width(c));
    }
    checks.push(limit.finish());
    BoundsReport { checks }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub p: f64,
    pub window: (usize, usize),
    /// Slope of `ln S_{m,p}` in `m`.
    pub edge_slope: f64,
    /// Slope of `ln I_p(h, r^m)` in `m`.
    pub ip_slope: f64,
    /// `(d_H ln r + edge_slope) / p`, the slope the proxy predicts.
    pub predicted_ip_slope: f64,
    pub discrepancy: f64,
}

/// Compare the edge-sum proxy `I_p(h, r^m)^p ≈ r^{m d_H} S_{m,p}` with a
/// direct evaluation of `I_p` on the vertices of `working` level.
pub fn ip_cross_check(fractal: &Fractal, boundary: &[f64], p: f64, top: usize, working: usize) -> Result<CrossCheck> {
    check_growth_inputs(fractal, top)?;
    if working > fractal.max_level() || working <= top {
        return Err(Error::InvalidArgument("working level must exceed the top level and be built".into()));
    }
    let table = edge_sum_table(fractal, &[boundary.to_vec()], &[p], top)?;
    let sums = &table[0][0];
    let h = crate::function::harmonic_extend(fractal, boundary, working)?;
    let engine = IpEngine::new(fractal, working)?;
    let ip = engine.ip_levels(&[&h.values], p, top)?.remove(0);
    let (lo, hi) = fit_window(top);
    let xs: Vec<f64> = (lo..=hi).map(|m| m as f64).collect();
    let (edge_slope, _) = fit_line(&xs, &sums[lo..=hi].iter().map(|v| v.ln()).collect::<Vec<_>>());
    let (ip_slope, _) = fit_line(&xs, &ip[lo..=hi].iter().map(|v| v.ln()).collect::<Vec<_>>());
    let predicted_ip_slope = (fractal.dims().d_h * fractal.r().ln() + edge_slope) / p;
    Ok(CrossCheck {
        p,
        window: (lo, hi),
        edge_slope,
        ip_slope,
        predicted_ip_slope,
        discrepancy: (ip_slope - predicted_ip_slope).abs(),
    })
}
