use nalgebra::{DMatrix, DVector};

use crate::function::PiecewiseHarmonic;
use crate::model::Fractal;

/// Orthogonal `L^2(μ)` projection onto `T_m`, the functions harmonic inside
/// every cell of `Λ_m` (not necessarily continuous).
pub fn project_piecewise_harmonic(fractal: &Fractal, f: &PiecewiseHarmonic, m: usize) -> PiecewiseHarmonic {
    assert!(m <= f.level(), "target level must not exceed the function's level");
    let hs = fractal.structure();
    let gram = hs.gram();
    let chol = gram.clone().cholesky().expect("Gram matrix is positive definite");
    let n = fractal.descriptor().branches();
    let v0 = hs.v0size();
    let mut cur = f.clone();
    // Nested projections compose, so project one level at a time.
    for k in (m..f.level()).rev() {
        let fine = fractal.table(k + 1);
        let coarse = fractal.table(k);
        let mu_f = fine.partition().measures();
        let mu_c = coarse.partition().measures();
        let mut rhs = vec![DVector::<f64>::zeros(v0); coarse.cell_count()];
        for (c, w) in fine.partition().words().iter().enumerate() {
            let p = fine.parents()[c] as usize;
            let plen = coarse.partition().words()[p].len();
            let mut a = DMatrix::<f64>::identity(v0, v0);
            for &l in &w.letters(n)[plen..] {
                a = hs.extension(l) * a;
            }
            let g_vals = gram * DVector::from_column_slice(cur.cell(c));
            rhs[p] += a.transpose() * g_vals * mu_f[c];
        }
        let mut out = Vec::with_capacity(coarse.cell_count() * v0);
        for (p, r) in rhs.into_iter().enumerate() {
            let x = chol.solve(&(r / mu_c[p]));
            out.extend_from_slice(x.as_slice());
        }
        cur = PiecewiseHarmonic::from_cells(k, v0, out);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{conditional_expectation, extend_cells};
    use crate::pcf::presets;

    #[test]
    fn harmonic_is_fixed() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let h = extend_cells(&fr, &[1.0, 0.2, -0.5], 3);
        let p = project_piecewise_harmonic(&fr, &h, 0);
        for (a, b) in p.values().iter().zip([1.0, 0.2, -0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_preserves_coarse_expectations() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let vals: Vec<f64> = (0..27 * 3).map(|k| ((k * 37) % 11) as f64).collect();
        let f = PiecewiseHarmonic::from_cells(3, 3, vals);
        let p2 = project_piecewise_harmonic(&fr, &f, 2);
        let e_f = conditional_expectation(&fr, &f);
        let e_p = conditional_expectation(&fr, &p2);
        for n in 0..=2 {
            for (a, b) in e_f.expectations[n].iter().zip(&e_p.expectations[n]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
