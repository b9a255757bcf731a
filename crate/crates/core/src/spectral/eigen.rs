//! Generalized eigenproblem `-H_{Λ_m} φ = λ M φ` for the lumped pair.
//!
//! Small levels are solved densely. Larger ones use spectrum slicing: the
//! number of eigenvalues below `λ` is the negative inertia of `-H - λM`,
//! read off an `L D L^T` factor, and the lowest pairs come from block
//! shift-invert iteration with Rayleigh-Ritz.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laplacian::GraphOperator;
use crate::linalg::{CsrMatrix, Ldl};
use crate::model::Fractal;
use crate::spectral::mass_matrix;

/// Dense solve up to this many vertices.
pub const DENSE_LIMIT: usize = 1500;
const MAX_SWEEPS: usize = 400;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub level: usize,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `M`-orthonormal eigenvectors as columns.
    pub vectors: DMatrix<f64>,
    pub mass: Vec<f64>,
}

impl SpectralData {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    /// `⟨f, φ_j⟩_M` for every stored pair.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let mf: DVector<f64> = DVector::from_iterator(f.len(), f.iter().zip(&self.mass).map(|(a, b)| a * b));
        (self.vectors.transpose() * mf).as_slice().to_vec()
    }

    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        (&self.vectors * DVector::from_column_slice(c)).as_slice().to_vec()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    /// Largest `‖-Hφ - λMφ‖ / (λ_max ‖Mφ‖)` over the stored pairs.
    pub fn max_residual(&self, op: &GraphOperator) -> f64 {
        let lam_scale = self.values.last().copied().unwrap_or(1.0).max(1.0);
        (0..self.count())
            .map(|j| {
                let phi = self.vector(j);
                let hphi = op.matrix().mul_vec(&phi);
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..phi.len() {
                    let mphi = self.mass[i] * phi[i];
                    let r = -hphi[i] - self.values[j] * mphi;
                    num += r * r;
                    den += mphi * mphi;
                }
                num.sqrt() / (lam_scale * den.sqrt())
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `Φ^T M Φ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut mv = self.vectors.clone();
        for (i, mut row) in mv.row_iter_mut().enumerate() {
            row *= self.mass[i];
        }
        let g = self.vectors.transpose() * mv;
        (g - DMatrix::identity(self.count(), self.count())).amax()
    }
}

/// Lowest `count` Neumann pairs at level `m`.
pub fn neumann_eigs(fractal: &Fractal, m: usize, count: usize) -> Result<SpectralData> {
    let op = fractal.laplacian(m);
    let mass = mass_matrix(fractal, m);
    neumann_eigs_from(&op, mass, count)
}

pub fn neumann_eigs_from(op: &GraphOperator, mass: Vec<f64>, count: usize) -> Result<SpectralData> {
    let n = op.n();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!("requested {count} eigenpairs of {n}")));
    }
    let (values, vectors) = if n <= DENSE_LIMIT {
        dense_pairs(op, &mass, count)?
    } else {
        iterative_pairs(op, &mass, count)?
    };
    let mut data = SpectralData { level: op.level(), values, vectors, mass };
    canonicalize(&mut data);
    Ok(data)
}

fn dense_pairs(op: &GraphOperator, mass: &[f64], count: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.n();
    let isq: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in op.matrix().entries() {
        s[(i, j)] = -v * isq[i] * isq[j];
    }
    let eig = s.symmetric_eigen();
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigSolverFailure("dense eigensolver produced non-finite values".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = DMatrix::<f64>::zeros(n, count);
    let mut vals = Vec::with_capacity(count);
    for (c, &k) in idx.iter().take(count).enumerate() {
        vals.push(eig.eigenvalues[k]);
        for i in 0..n {
            vecs[(i, c)] = eig.eigenvectors[(i, k)] * isq[i];
        }
    }
    Ok((vals, vecs))
}

fn shifted(op: &GraphOperator, mass: &[f64], lambda: f64) -> CsrMatrix {
    op.matrix().add_scaled_diagonal(-1.0, -lambda, mass)
}

fn elimination_order(n: usize) -> Vec<usize> {
    (0..n).rev().collect()
}

/// Number of eigenvalues strictly below `lambda`.
pub fn count_below(op: &GraphOperator, mass: &[f64], lambda: f64) -> Result<usize> {
    let order = elimination_order(op.n());
    let mut lam = lambda;
    for _ in 0..8 {
        match Ldl::factor(&shifted(op, mass, lam), &order) {
            Ok(f) => return Ok(f.negative_count()),
            // `lambda` hit an eigenvalue; nudge it.
            Err(_) => lam = lam * (1.0 - 1e-12) - 1e-300,
        }
    }
    Err(Error::EigSolverFailure(format!("could not factor the shifted pencil near {lambda}")))
}

/// Upper bound for the spectrum (Gershgorin on `M^{-1}(-H)`).
pub fn spectral_upper_bound(op: &GraphOperator, mass: &[f64]) -> f64 {
    (0..op.n())
        .map(|i| {
            let (_, v) = op.matrix().row(i);
            v.iter().map(|x| x.abs()).sum::<f64>() / mass[i]
        })
        .fold(0.0, f64::max)
}

/// Smallest `λ` (to relative `tol`) with at least `k` eigenvalues below it.
pub fn bisect_count(op: &GraphOperator, mass: &[f64], k: usize, tol: f64) -> Result<f64> {
    let mut hi = spectral_upper_bound(op, mass) * 1.01;
    let mut lo = 0.0;
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if count_below(op, mass, mid)? >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn iterative_pairs(op: &GraphOperator, mass: &[f64], count: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.n();
    let block = (count + (count / 2).max(12)).min(n);
    // Shift just below zero keeps the pencil definite and the target end of
    // the spectrum dominant.
    let top = bisect_count(op, mass, block.min(n - 1) + 1, 1e-3)?;
    let shift = 1e-6 * top;
    let factor = Ldl::factor(&shifted(op, mass, -shift), &elimination_order(n))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DMatrix::<f64>::from_fn(n, block, |_, _| rng.random::<f64>() - 0.5);
    let mut vals = vec![0.0; block];
    for _sweep in 0..MAX_SWEEPS {
        let mut y = DMatrix::<f64>::zeros(n, block);
        for c in 0..block {
            let mut col: Vec<f64> = (0..n).map(|i| mass[i] * x[(i, c)]).collect();
            factor.solve_in_place(&mut col);
            y.set_column(c, &DVector::from_vec(col));
        }
        let (v, z) = rayleigh_ritz(op, mass, &y)?;
        x = z;
        vals = v;
        let lam_scale = vals[count - 1].max(1.0);
        let mut worst: f64 = 0.0;
        for j in 0..count {
            let phi: Vec<f64> = x.column(j).iter().copied().collect();
            let hphi = op.matrix().mul_vec(&phi);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let r = -hphi[i] - vals[j] * mass[i] * phi[i];
                num += r * r;
                den += (mass[i] * phi[i]).powi(2);
            }
            worst = worst.max(num.sqrt() / (lam_scale * den.sqrt()));
        }
        if worst <= RESIDUAL_TOL {
            let out = x.columns(0, count).into_owned();
            vals.truncate(count);
            return Ok((vals, out));
        }
    }
    Err(Error::EigSolverFailure(format!(
        "block iteration did not converge for {count} pairs (last λ ≈ {:.6e})",
        vals[count.saturating_sub(1)]
    )))
}

/// Ritz pairs of the pencil on span(`y`), `M`-orthonormal.
fn rayleigh_ritz(op: &GraphOperator, mass: &[f64], y: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (n, b) = y.shape();
    let mut my = y.clone();
    let mut hy = DMatrix::<f64>::zeros(n, b);
    for c in 0..b {
        let col: Vec<f64> = y.column(c).iter().copied().collect();
        let h = op.matrix().mul_vec(&col);
        for i in 0..n {
            my[(i, c)] *= mass[i];
            hy[(i, c)] = -h[i];
        }
    }
    let bm = y.transpose() * &my;
    let am = y.transpose() * &hy;
    let bm = (&bm + bm.transpose()) * 0.5;
    let am = (&am + am.transpose()) * 0.5;
    let chol = bm
        .cholesky()
        .ok_or_else(|| Error::EigSolverFailure("search block lost rank".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigSolverFailure("search block lost rank".into()))?;
    let c = &linv * am * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..b).collect();
    idx.sort_by(|&a, &bb| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[bb]));
    let coeffs = linv.transpose() * &eig.eigenvectors;
    let mut vals = Vec::with_capacity(b);
    let mut out = DMatrix::<f64>::zeros(n, b);
    let full = y * coeffs;
    for (k, &j) in idx.iter().enumerate() {
        vals.push(eig.eigenvalues[j]);
        out.set_column(k, &full.column(j));
    }
    Ok((vals, out))
}

/// Deterministic basis inside each cluster of (numerically) equal
/// eigenvalues: project unit vectors in index order and orthonormalize.
fn canonicalize(data: &mut SpectralData) {
    let n = data.n();
    let count = data.count();
    let scale = data.values.last().copied().unwrap_or(1.0).abs().max(1.0);
    let mut start = 0;
    while start < count {
        let mut end = start + 1;
        while end < count && (data.values[end] - data.values[start]).abs() <= 1e-8 * scale {
            end += 1;
        }
        let q = data.vectors.columns(start, end - start).into_owned();
        let basis = canonical_basis(&q, &data.mass);
        let mean = data.values[start..end].iter().sum::<f64>() / (end - start) as f64;
        for (k, col) in basis.into_iter().enumerate() {
            data.vectors.set_column(start + k, &col);
            if end - start > 1 {
                data.values[start + k] = mean;
            }
        }
        start = end;
    }
    if count > 0 && data.values[0].abs() < 1e-10 * scale {
        data.values[0] = 0.0;
        let total: f64 = data.mass.iter().sum();
        if data.values.get(1).is_none_or(|&l| l > 1e-8 * scale) {
            data.vectors.set_column(0, &DVector::from_element(n, 1.0 / total.sqrt()));
        }
    }
}

fn canonical_basis(q: &DMatrix<f64>, mass: &[f64]) -> Vec<DVector<f64>> {
    let (n, c) = q.shape();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(c);
    let minner = |a: &DVector<f64>, b: &DVector<f64>| -> f64 { (0..n).map(|i| a[i] * mass[i] * b[i]).sum() };
    if c == 1 {
        let mut v = q.column(0).into_owned();
        if let Some(pivot) = v.iter().find(|x| x.abs() > 1e-8 * v.amax()) {
            if *pivot < 0.0 {
                v = -v;
            }
        }
        return vec![v];
    }
    for i in 0..n {
        if out.len() == c {
            break;
        }
        // M-orthogonal projection of e_i onto span(q): q (q^T M e_i).
        let coeff = q.row(i).transpose() * mass[i];
        let mut v = q * coeff;
        for b in &out {
            let d = minner(&v, b);
            v -= b * d;
        }
        let norm = minner(&v, &v).sqrt();
        if norm > 1e-6 * mass[i].sqrt() {
            out.push(v / norm);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf::presets;

    #[test]
    fn constant_ground_state() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let s = neumann_eigs(&fr, 3, 10).unwrap();
        assert_eq!(s.values[0], 0.0);
        let phi0 = s.vector(0);
        assert!(phi0.iter().all(|&x| (x - phi0[0]).abs() < 1e-12));
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.max_residual(&fr.laplacian(3)) < 1e-8);
        assert!(s.orthonormality_error() < 1e-10);
    }

    #[test]
    fn counting_agrees_with_dense() {
        let fr = Fractal::new(&presets::vicsek(), 2).unwrap();
        let op = fr.laplacian(2);
        let mass = mass_matrix(&fr, 2);
        let s = neumann_eigs_from(&op, mass.clone(), op.n()).unwrap();
        for lam in [5.0, 50.0, 300.0, 2000.0] {
            let dense = s.values.iter().filter(|&&x| x < lam).count();
            assert_eq!(count_below(&op, &mass, lam).unwrap(), dense);
        }
    }

    #[test]
    fn iterative_matches_dense() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 4).unwrap();
        let op = fr.laplacian(4);
        let mass = mass_matrix(&fr, 4);
        let (dv, _) = dense_pairs(&op, &mass, 20).unwrap();
        let (iv, vecs) = iterative_pairs(&op, &mass, 20).unwrap();
        for (a, b) in dv.iter().zip(&iv) {
            assert!((a - b).abs() <= 1e-7 * b.max(1.0), "{a} vs {b}");
        }
        assert_eq!(vecs.ncols(), 20);
    }

    #[test]
    fn tie_breaking_is_deterministic() {
        let fr = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
        let a = neumann_eigs(&fr, 3, 12).unwrap();
        let b = neumann_eigs(&fr, 3, 12).unwrap();
        assert_eq!(a.vectors, b.vectors);
    }
}
