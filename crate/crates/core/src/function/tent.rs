//! Tent expansion `f = f_0 + Σ_n f_n` with `f_n` vanishing on `V_{Λ_{n-1}}`.

use crate::error::{Error, Result};
use crate::function::{extend_level0, prolong, PiecewiseHarmonic, VertexFunction};
use crate::model::Fractal;

#[derive(Debug, Clone, PartialEq)]
pub struct TentSeries {
    /// Values of `f_0` on the prototype points.
    pub f0: Vec<f64>,
    /// `coeffs[n - 1]` holds `f_n` on the ring `V̊_{Λ_n}`.
    pub coeffs: Vec<Vec<f64>>,
}

impl TentSeries {
    pub fn max_level(&self) -> usize {
        self.coeffs.len()
    }

    /// `f_n` as vertex values on `V_{Λ_n}`.
    pub fn component(&self, fractal: &Fractal, n: usize) -> VertexFunction {
        if n == 0 {
            return extend_level0(fractal, &self.f0, 0);
        }
        let table = fractal.table(n);
        let mut v = vec![0.0; table.vertex_count()];
        v[table.ring()].copy_from_slice(&self.coeffs[n - 1]);
        VertexFunction::new(n, v)
    }

    /// `f_n` as a continuous piecewise-harmonic function on `Λ_n`.
    pub fn component_cells(&self, fractal: &Fractal, n: usize) -> PiecewiseHarmonic {
        let c = self.component(fractal, n);
        PiecewiseHarmonic::from_vertex(fractal.table(n), &c.values).expect("sizes agree")
    }

    /// `Σ_{n ≤ k} f_n` on `V_{Λ_k}`.
    pub fn partial_sum(&self, fractal: &Fractal, k: usize) -> Vec<f64> {
        let mut acc = extend_level0(fractal, &self.f0, 0).values;
        for n in 1..=k {
            acc = prolong(fractal, n - 1, &acc).expect("sizes agree");
            let ring = fractal.table(n).ring();
            for (x, c) in acc[ring].iter_mut().zip(&self.coeffs[n - 1]) {
                *x += c;
            }
        }
        acc
    }
}

/// Expand level-`M` samples in tent functions.
pub fn tent_interpolation(fractal: &Fractal, samples: &VertexFunction) -> Result<TentSeries> {
    let m = samples.level;
    let table = fractal.table(m);
    if samples.values.len() != table.vertex_count() {
        return Err(Error::DimensionMismatch { expected: table.vertex_count(), got: samples.values.len() });
    }
    let v0 = fractal.descriptor().v0size();
    let f0 = samples.values[..v0].to_vec();
    let mut acc = extend_level0(fractal, &f0, 0).values;
    let mut coeffs = Vec::with_capacity(m);
    for n in 1..=m {
        acc = prolong(fractal, n - 1, &acc)?;
        let ring = fractal.table(n).ring();
        let c: Vec<f64> = ring.clone().map(|v| samples.values[v] - acc[v]).collect();
        for (x, y) in acc[ring].iter_mut().zip(&c) {
            *x += y;
        }
        coeffs.push(c);
    }
    Ok(TentSeries { f0, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::harmonic_extend;
    use crate::pcf::presets;

    #[test]
    fn harmonic_samples_have_no_higher_tents() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 4).unwrap();
        let h = harmonic_extend(&fr, &[0.3, -1.0, 2.0], 4).unwrap();
        let t = tent_interpolation(&fr, &h).unwrap();
        for c in &t.coeffs {
            assert!(c.iter().all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn single_tent_round_trip() {
        let fr = Fractal::new(&presets::vicsek(), 3).unwrap();
        let ring = fr.table(1).ring();
        let mut v = vec![0.0; fr.table(1).vertex_count()];
        v[ring.start + 2] = 1.0;
        let psi = prolong(&fr, 2, &prolong(&fr, 1, &v).unwrap()).unwrap();
        let t = tent_interpolation(&fr, &VertexFunction::new(3, psi.clone())).unwrap();
        assert!(t.f0.iter().all(|&x| x == 0.0));
        assert_eq!(t.coeffs[0][2], 1.0);
        assert!(t.coeffs[1..].iter().flatten().all(|x| x.abs() < 1e-14));
        let back = t.partial_sum(&fr, 3);
        for (a, b) in back.iter().zip(&psi) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
