//! `L^p(μ)` norms of piecewise-harmonic functions.
//!
//! `p = 2` is exact through the Gram matrix. Other exponents refine every
//! cell `depth` more letters and apply the `α`-weighted vertex rule on the
//! refined cells, which is exact when `|f|^p` is cell-harmonic at that depth.

use nalgebra::DMatrix;

use crate::function::PiecewiseHarmonic;
use crate::model::Fractal;
use crate::pcf::Word;

pub const DEFAULT_DEPTH: usize = 5;
const MAX_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpEstimate {
    pub value: f64,
    /// `|value(depth) - value(depth - 1)|`; zero when exact.
    pub error: f64,
    pub depth: usize,
}

/// Weighted sampling rule: `∫_K |h|^p ≈ Σ_k weight_k |rows_k · h|^p`.
#[derive(Debug, Clone)]
pub struct SamplingRule {
    depth: usize,
    weights: Vec<f64>,
    rows: DMatrix<f64>,
}

impl SamplingRule {
    pub fn new(fractal: &Fractal, depth: usize) -> Self {
        let hs = fractal.structure();
        let n = fractal.descriptor().branches();
        let v0 = hs.v0size();
        let alpha = hs.alpha();
        let mu = hs.branch_measures();
        let mut mats: Vec<(DMatrix<f64>, f64)> = vec![(DMatrix::identity(v0, v0), 1.0)];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(mats.len() * n);
            for (m, w) in &mats {
                for i in 0..n {
                    next.push((hs.extension(i) * m, w * mu[i]));
                }
            }
            mats = next;
        }
        let mut rows = DMatrix::zeros(mats.len() * v0, v0);
        let mut weights = Vec::with_capacity(mats.len() * v0);
        for (k, (m, w)) in mats.iter().enumerate() {
            for q in 0..v0 {
                rows.row_mut(k * v0 + q).copy_from(&m.row(q));
                weights.push(w * alpha[q]);
            }
        }
        SamplingRule { depth, weights, rows }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `∫_K |h|^p dμ` for the cell-harmonic `h` with level-0 values `v`.
    pub fn integrate_abs_pow(&self, v: &[f64], p: f64) -> f64 {
        let n = v.len();
        let mut s = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let mut x = 0.0;
            for c in 0..n {
                x += self.rows[(k, c)] * v[c];
            }
            s += w * x.abs().powf(p);
        }
        s
    }

    pub fn sup_abs(&self, v: &[f64]) -> f64 {
        let n = v.len();
        (0..self.weights.len())
            .map(|k| (0..n).map(|c| self.rows[(k, c)] * v[c]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Words of length `depth` in lexicographic order.
pub fn all_words(branches: usize, depth: usize) -> Vec<Word> {
    let mut out = vec![Word::EMPTY];
    for _ in 0..depth {
        out = out.iter().flat_map(|w| (0..branches).map(move |i| w.child(i, branches))).collect();
    }
    out
}

fn pth_power_integral(f: &PiecewiseHarmonic, fractal: &Fractal, rule: &SamplingRule, p: f64) -> f64 {
    let mu = fractal.table(f.level()).partition().measures();
    (0..f.cell_count()).map(|k| mu[k] * rule.integrate_abs_pow(f.cell(k), p)).sum()
}

/// `‖f‖_p` from sampling at `depth`, extrapolated across the last three
/// depths; the error is the spread against the plain depth and depth-1 sums.
pub fn lp_norm(f: &PiecewiseHarmonic, fractal: &Fractal, p: f64, depth: usize) -> LpEstimate {
    assert!(p >= 1.0, "p must be at least 1");
    if p == 2.0 {
        return LpEstimate { value: f.l2_norm(fractal), error: 0.0, depth: 0 };
    }
    if p.is_infinite() {
        let rule = SamplingRule::new(fractal, depth);
        let value = (0..f.cell_count()).map(|k| rule.sup_abs(f.cell(k))).fold(0.0, f64::max);
        return LpEstimate { value, error: 0.0, depth };
    }
    let integral = |d: usize| pth_power_integral(f, fractal, &SamplingRule::new(fractal, d), p);
    let j = integral(depth);
    if depth == 0 {
        return LpEstimate { value: j.powf(1.0 / p), error: f64::INFINITY, depth };
    }
    let j1 = integral(depth - 1);
    let mut best = j;
    if depth >= 2 {
        // The sampling error contracts geometrically with depth; remove the
        // leading term when the observed contraction is clean.
        let j2 = integral(depth - 2);
        let rho = (j - j1) / (j1 - j2);
        if rho.is_finite() && rho > 0.0 && rho < 0.9 {
            best = (j - rho * j1) / (1.0 - rho);
        }
    }
    let value = best.max(0.0).powf(1.0 / p);
    let error = (value - j1.powf(1.0 / p)).abs().max((value - j.powf(1.0 / p)).abs());
    LpEstimate { value, error, depth }
}

/// Like [`lp_norm`], deepening from [`DEFAULT_DEPTH`] until the estimate
/// meets `tol` (relative) or the depth cap is reached.
pub fn lp_norm_to_tolerance(f: &PiecewiseHarmonic, fractal: &Fractal, p: f64, tol: f64) -> LpEstimate {
    let mut depth = DEFAULT_DEPTH;
    loop {
        let est = lp_norm(f, fractal, p, depth);
        let branches = fractal.descriptor().branches() as f64;
        let next_cost = branches.powi(depth as i32 + 1);
        if est.error <= tol * est.value.max(f64::MIN_POSITIVE) || depth >= MAX_DEPTH || next_cost > 2e6 {
            return est;
        }
        depth += 1;
    }
}

/// Cache of sampling rules by depth for repeated norm evaluations.
#[derive(Debug, Clone)]
pub struct LpNormer<'a> {
    fractal: &'a Fractal,
    rule: SamplingRule,
    p: f64,
}

impl<'a> LpNormer<'a> {
    pub fn new(fractal: &'a Fractal, p: f64, depth: usize) -> Self {
        let d = if p == 2.0 { 0 } else { depth };
        LpNormer { fractal, rule: SamplingRule::new(fractal, d), p }
    }

    pub fn norm(&self, f: &PiecewiseHarmonic) -> f64 {
        if self.p == 2.0 {
            f.l2_norm(self.fractal)
        } else if self.p.is_infinite() {
            (0..f.cell_count()).map(|k| self.rule.sup_abs(f.cell(k))).fold(0.0, f64::max)
        } else {
            pth_power_integral(f, self.fractal, &self.rule, self.p).powf(1.0 / self.p)
        }
    }

    /// `(Σ_w μ_w |c_w|^p)^{1/p}` for a piecewise constant on level `m`.
    pub fn piecewise_constant_norm(&self, m: usize, c: &[f64]) -> f64 {
        let mu = self.fractal.table(m).partition().measures();
        if self.p.is_infinite() {
            return c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        }
        let s: f64 = mu.iter().zip(c).map(|(w, x)| w * x.abs().powf(self.p)).sum();
        s.powf(1.0 / self.p)
    }
}
