//! The functional `I_p(f, t)` on the vertex set of a working level.
//!
//! Points are the vertices of `V_{Λ_L}` weighted by their lumped masses, so
//! `I_p(f,t)^p ≈ t^{-d_H} Σ_x Σ_{R(x,y)<t} M(x) M(y) |f(x) - f(y)|^p`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{PiecewiseHarmonic, VertexFunction};
use crate::model::Fractal;
use crate::par::map_blocks;
use crate::resistance::ResistanceSolver;
use crate::spectral::mass_matrix;

/// `R < t` is tested as `R < t (1 - STRICT_TOLERANCE)` so that pairs at
/// exactly the ball radius are excluded regardless of rounding.
pub const STRICT_TOLERANCE: f64 = 1e-9;

const BLOCK: usize = 32;

pub fn strictly_within(resistance: f64, t: f64) -> bool {
    resistance < t * (1.0 - STRICT_TOLERANCE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpMode {
    /// Full double sum over all vertex pairs.
    Exact,
    /// Sources drawn from the vertex masses; the inner integral stays exact.
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IpValue {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Resistance data and masses at one working level.
pub struct IpEngine<'a> {
    fractal: &'a Fractal,
    level: usize,
    solver: ResistanceSolver,
    diag: Vec<f64>,
    mass: Vec<f64>,
}

impl<'a> IpEngine<'a> {
    pub fn new(fractal: &'a Fractal, level: usize) -> Result<Self> {
        if level > fractal.max_level() {
            return Err(Error::InvalidArgument(format!(
                "working level {level} above the built maximum {}",
                fractal.max_level()
            )));
        }
        let solver = ResistanceSolver::new(fractal, level)?;
        let n = solver.n();
        let cols = map_blocks(n.div_ceil(BLOCK), |b| -> Result<Vec<f64>> {
            (b * BLOCK..((b + 1) * BLOCK).min(n)).map(|x| Ok(solver.green_column(x)?[x])).collect()
        });
        let mut diag = Vec::with_capacity(n);
        for c in cols {
            diag.extend(c?);
        }
        Ok(IpEngine { fractal, level, solver, diag, mass: mass_matrix(fractal, level) })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn resistances_from(&self, x: usize) -> Result<Vec<f64>> {
        self.solver.resistances_from(x, &self.diag)
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), got: f.len() });
        }
        Ok(())
    }

    /// For each function and each radius `t_j` (strictly decreasing), the
    /// pair sum `Σ_{R(x,y)<t_j} M(x) M(y) |f(x)-f(y)|^p`, or the largest
    /// difference when `p = ∞`.
    pub fn pair_sums(&self, fs: &[&[f64]], radii: &[f64], p: f64) -> Result<Vec<Vec<f64>>> {
        for f in fs {
            self.check(f)?;
        }
        if radii.windows(2).any(|w| !(w[0] > w[1])) || radii.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("radii must be positive and strictly decreasing".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} must be at least 1")));
        }
        let thr: Vec<f64> = radii.iter().map(|t| t * (1.0 - STRICT_TOLERANCE)).collect();
        let nb = radii.len();
        let nf = fs.len();
        let n = self.vertex_count();
        let sup = p.is_infinite();
        let square = p == 2.0;
        let blocks = map_blocks(n.div_ceil(BLOCK), |b| -> Result<Vec<f64>> {
            // acc[i * nb + band], band = deepest radius still containing the pair
            let mut acc = vec![0.0; nf * nb];
            for x in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let g = self.solver.green_column(x)?;
                let (gx, mx) = (self.diag[x], self.mass[x]);
                for y in x + 1..n {
                    let r = gx + self.diag[y] - 2.0 * g[y];
                    let k = thr.partition_point(|&t| t > r);
                    if k == 0 {
                        continue;
                    }
                    let band = k - 1;
                    let w = 2.0 * mx * self.mass[y];
                    for (i, f) in fs.iter().enumerate() {
                        let d = (f[x] - f[y]).abs();
                        let slot = &mut acc[i * nb + band];
                        if sup {
                            *slot = f64::max(*slot, d);
                        } else if square {
                            *slot += w * d * d;
                        } else if d > 0.0 {
                            *slot += w * d.powf(p);
                        }
                    }
                }
            }
            Ok(acc)
        });
        let mut total = vec![0.0; nf * nb];
        for blk in blocks {
            for (t, a) in total.iter_mut().zip(blk?) {
                if sup {
                    *t = f64::max(*t, a);
                } else {
                    *t += a;
                }
            }
        }
        Ok((0..nf)
            .map(|i| {
                let mut row = total[i * nb..(i + 1) * nb].to_vec();
                for j in (0..nb.saturating_sub(1)).rev() {
                    row[j] = if sup { row[j].max(row[j + 1]) } else { row[j] + row[j + 1] };
                }
                row
            })
            .collect())
    }

    /// `I_p(f_i, r^m)` for `m = 0..=top`.
    pub fn ip_levels(&self, fs: &[&[f64]], p: f64, top: usize) -> Result<Vec<Vec<f64>>> {
        let r = self.fractal.r();
        let radii: Vec<f64> = (0..=top).map(|m| r.powi(m as i32)).collect();
        let sums = self.pair_sums(fs, &radii, p)?;
        Ok(sums.into_iter().map(|row| self.finish(&row, &radii, p)).collect())
    }

    pub fn ip(&self, f: &[f64], p: f64, t: f64) -> Result<f64> {
        let row = self.pair_sums(&[f], &[t], p)?;
        Ok(self.finish(&row[0], &[t], p)[0])
    }

    fn finish(&self, sums: &[f64], radii: &[f64], p: f64) -> Vec<f64> {
        if p.is_infinite() {
            return sums.to_vec();
        }
        let dh = self.fractal.dims().d_h;
        sums.iter().zip(radii).map(|(s, t)| (t.powf(-dh) * s).powf(1.0 / p)).collect()
    }

    /// Monte Carlo estimate: `samples` sources drawn from the vertex masses,
    /// each with its exact inner ball integral.
    pub fn monte_carlo(&self, f: &[f64], p: f64, t: f64, seed: u64, samples: usize) -> Result<IpValue> {
        self.check(f)?;
        if samples < 2 || !(t > 0.0) || !(p >= 1.0) {
            return Err(Error::InvalidArgument("need t > 0, p ≥ 1 and at least two samples".into()));
        }
        let dist = WeightedIndex::new(&self.mass).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources: Vec<usize> = (0..samples).map(|_| dist.sample(&mut rng)).collect();
        let dh = self.fractal.dims().d_h;
        let mut values = Vec::with_capacity(samples);
        for &x in &sources {
            let rx = self.resistances_from(x)?;
            let inner = if p.is_infinite() {
                (0..f.len()).filter(|&y| strictly_within(rx[y], t)).map(|y| (f[x] - f[y]).abs()).fold(0.0, f64::max)
            } else {
                let s: f64 = (0..f.len())
                    .filter(|&y| strictly_within(rx[y], t))
                    .map(|y| self.mass[y] * (f[x] - f[y]).abs().powf(p))
                    .sum();
                t.powf(-dh) * s
            };
            values.push(inner);
        }
        if p.is_infinite() {
            // A sampled sup is only a lower bound; no error bar applies.
            return Ok(IpValue { value: values.iter().fold(0.0, |a: f64, &b| a.max(b)), std_error: None });
        }
        let k = samples as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        let se_mean = (var / k).sqrt();
        let value = mean.powf(1.0 / p);
        let std_error = if mean > 0.0 { se_mean / (p * mean.powf(1.0 - 1.0 / p)) } else { 0.0 };
        Ok(IpValue { value, std_error: Some(std_error) })
    }
}

/// Vertex values on `V_{Λ_level}`: cells are refined when coarser and
/// vertex values restricted when finer; jumps are averaged at vertices.
pub fn working_values(fractal: &Fractal, f: &PiecewiseHarmonic, level: usize) -> Vec<f64> {
    if f.level() <= level {
        let fine = f.refine(fractal, level);
        fine.vertex_average(fractal.table(level)).values
    } else {
        let own = f.vertex_average(fractal.table(f.level())).values;
        own[..fractal.table(level).vertex_count()].to_vec()
    }
}

/// `I_p(f, t)` with `f` given on the vertices of its own level.
pub fn ip_functional(fractal: &Fractal, f: &VertexFunction, p: f64, t: f64, mode: IpMode) -> Result<IpValue> {
    let engine = IpEngine::new(fractal, f.level)?;
    match mode {
        IpMode::Exact => Ok(IpValue { value: engine.ip(&f.values, p, t)?, std_error: None }),
        IpMode::MonteCarlo { seed, samples } => engine.monte_carlo(&f.values, p, t, seed, samples),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::harmonic_extend;
    use crate::pcf::presets;

    fn interval_coords(fr: &Fractal, m: usize) -> Vec<f64> {
        harmonic_extend(fr, &[0.0, 1.0], m).unwrap().values
    }

    #[test]
    fn constants_vanish() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let e = IpEngine::new(&fr, 3).unwrap();
        let one = vec![2.5; e.vertex_count()];
        for v in e.ip_levels(&[&one], 1.5, 3).unwrap()[0].iter() {
            assert_eq!(*v, 0.0);
        }
    }

    // Both interval oracles carry an O(h/t) lattice bias, h = 2^{-10}.
    const H: f64 = 1.0 / 1024.0;

    #[test]
    fn interval_step() {
        // ∫∫_{|x-y|<t} |1_{[0,1/2]}(x) - 1_{[0,1/2]}(y)|^p = t², so I_p = t^{1/p}.
        let fr = Fractal::new(&presets::interval(), 10).unwrap();
        let x = interval_coords(&fr, 10);
        let f: Vec<f64> = x
            .iter()
            .map(|&s| if (s - 0.5).abs() < 1e-12 { 0.5 } else if s < 0.5 { 1.0 } else { 0.0 })
            .collect();
        let e = IpEngine::new(&fr, 10).unwrap();
        for (t, p) in [(1.0 / 8.0, 1.0), (1.0 / 16.0, 2.0), (1.0 / 8.0, 3.0)] {
            let v = e.ip(&f, p, t).unwrap();
            let rel = v.powf(p) / t - 1.0;
            assert!(rel.abs() < 3.0 * H / t, "t={t} p={p}: {v}");
        }
    }

    #[test]
    fn interval_linear() {
        // ∫_0^1 ∫_{|x-y|<t} |x-y|^p = 2t^{p+1}/(p+1) - 2t^{p+2}/(p+2), so for
        // small t, I_p ≈ (2/(p+1))^{1/p} t.
        let fr = Fractal::new(&presets::interval(), 10).unwrap();
        let x = interval_coords(&fr, 10);
        let e = IpEngine::new(&fr, 10).unwrap();
        let t = 1.0 / 32.0;
        for p in [1.0, 2.0, 4.0] {
            let v = e.ip(&x, p, t).unwrap();
            let exact = 2.0 * t.powf(p) / (p + 1.0) - 2.0 * t.powf(p + 1.0) / (p + 2.0);
            let rel = v.powf(p) / exact - 1.0;
            assert!(rel.abs() < (p + 1.0) * H / t, "p={p}: {rel}");
        }
    }

    #[test]
    fn sup_version_and_monte_carlo() {
        let fr = Fractal::new(&presets::interval(), 6).unwrap();
        let x = interval_coords(&fr, 6);
        let e = IpEngine::new(&fr, 6).unwrap();
        let sup = e.ip(&x, f64::INFINITY, 0.25).unwrap();
        assert!((sup - (0.25 - 1.0 / 64.0)).abs() < 1e-12);
        let exact = e.ip(&x, 2.0, 0.25).unwrap();
        let mc = e.monte_carlo(&x, 2.0, 0.25, 7, 400).unwrap();
        let se = mc.std_error.unwrap();
        assert!(se > 0.0 && (mc.value - exact).abs() < 5.0 * se, "{mc:?} vs {exact}");
        let again = e.monte_carlo(&x, 2.0, 0.25, 7, 400).unwrap();
        assert_eq!(mc, again);
    }
}
