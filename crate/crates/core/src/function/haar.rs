//! Conditional expectations on the partitions `Λ_n` and their Haar layers.

use crate::function::PiecewiseHarmonic;
use crate::model::Fractal;

/// `E[f|Λ_n]` and `Ẽ[f|Λ_n] = E[f|Λ_n] - E[f|Λ_{n-1}]` as per-cell constants
/// for `n = 0..=m`; `Ẽ[f|Λ_0] = E[f|Λ_0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficients {
    pub expectations: Vec<Vec<f64>>,
    pub layers: Vec<Vec<f64>>,
}

impl HaarCoefficients {
    pub fn levels(&self) -> usize {
        self.layers.len()
    }

    /// `Σ_{n ≤ k} Ẽ[f|Λ_n]` pulled to the cells of level `k`.
    pub fn telescoped(&self, fractal: &Fractal, k: usize) -> Vec<f64> {
        let mut acc = self.layers[0].clone();
        for n in 1..=k {
            let par = fractal.table(n).parents();
            acc = par.iter().zip(&self.layers[n]).map(|(&p, &x)| acc[p as usize] + x).collect();
        }
        acc
    }
}

/// Haar decomposition of `f` up to its own level `m`.
pub fn conditional_expectation(fractal: &Fractal, f: &PiecewiseHarmonic) -> HaarCoefficients {
    let m = f.level();
    let mut expectations = vec![Vec::new(); m + 1];
    expectations[m] = f.cell_averages(fractal);
    for n in (0..m).rev() {
        let fine = fractal.table(n + 1);
        let mu_f = fine.partition().measures();
        let mu_c = fractal.table(n).partition().measures();
        let mut acc = vec![0.0; mu_c.len()];
        for (k, &p) in fine.parents().iter().enumerate() {
            acc[p as usize] += mu_f[k] * expectations[n + 1][k];
        }
        for (a, &w) in acc.iter_mut().zip(mu_c) {
            *a /= w;
        }
        expectations[n] = acc;
    }
    let mut layers = Vec::with_capacity(m + 1);
    layers.push(expectations[0].clone());
    for n in 1..=m {
        let par = fractal.table(n).parents();
        layers.push(
            par.iter()
                .zip(&expectations[n])
                .map(|(&p, &x)| x - expectations[n - 1][p as usize])
                .collect(),
        );
    }
    HaarCoefficients { expectations, layers }
}
