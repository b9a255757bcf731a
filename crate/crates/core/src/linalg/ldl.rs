//! Sparse `L D L^T` factorization (up-looking, elimination-tree based).
//!
//! No pivoting is done, so the elimination order is the caller's. For the
//! level Laplacians ordering by birth level, finest first, keeps the fill
//! inside cells. Indefinite matrices are accepted as long as no pivot
//! vanishes, which makes the factor usable for Sylvester inertia counts.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    /// Factor the symmetric matrix `a` (both triangles stored) in `order`.
    pub fn factor(a: &CsrMatrix, order: &[usize]) -> Result<Ldl> {
        let n = a.n();
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: order.len() });
        }
        let mut pinv = vec![NONE; n];
        for (k, &i) in order.iter().enumerate() {
            if i >= n || pinv[i] != NONE {
                return Err(Error::InvalidArgument("elimination order is not a permutation".into()));
            }
            pinv[i] = k;
        }

        // Symbolic pass: elimination tree and column counts.
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let (cols, _) = a.row(order[k]);
            for &j in cols {
                let mut i = pinv[j as usize];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let total = lp[n];
        let mut li = vec![0u32; total];
        let mut lx = vec![0.0; total];
        let mut d = vec![0.0; n];

        // Numeric pass.
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        lnz.iter_mut().for_each(|c| *c = 0);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let (cols, vals) = a.row(order[k]);
            for (&j, &v) in cols.iter().zip(vals) {
                let mut i = pinv[j as usize];
                if i > k {
                    continue;
                }
                y[i] += v;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = pattern[top];
                top += 1;
                let yi = y[i];
                y[i] = 0.0;
                let end = lp[i] + lnz[i];
                for p in lp[i]..end {
                    y[li[p] as usize] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k as u32;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(Error::SolverFailure(format!(
                    "zero or non-finite pivot at elimination step {k} (row {})",
                    order[k]
                )));
            }
        }
        Ok(Ldl { n, perm: order.to_vec(), lp, li, lx, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    y[self.li[p] as usize] -= self.lx[p] * yj;
                }
            }
        }
        for (yj, dj) in y.iter_mut().zip(&self.d) {
            *yj /= dj;
        }
        for j in (0..self.n).rev() {
            let mut acc = y[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= self.lx[p] * y[self.li[p] as usize];
            }
            y[j] = acc;
        }
        for (k, &i) in self.perm.iter().enumerate() {
            b[i] = y[k];
        }
    }

    /// Number of negative pivots, i.e. negative eigenvalues of the matrix.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn path_laplacian_plus(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i as u32, i as u32, shift));
            if i + 1 < n {
                t.push((i as u32, i as u32, 1.0));
                t.push((i as u32 + 1, i as u32 + 1, 1.0));
                t.push((i as u32, i as u32 + 1, -1.0));
                t.push((i as u32 + 1, i as u32, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solves_spd_in_any_order() {
        let a = path_laplacian_plus(7, 0.3);
        let b: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        for order in [(0..7).collect::<Vec<_>>(), (0..7).rev().collect(), vec![3, 0, 6, 1, 5, 2, 4]] {
            let f = Ldl::factor(&a, &order).unwrap();
            let x = f.solve(&b);
            let r = a.mul_vec(&x);
            for i in 0..7 {
                assert!((r[i] - b[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inertia_matches_dense_spectrum() {
        let a = path_laplacian_plus(9, 0.0);
        let eig = DMatrix::from(a.to_dense()).symmetric_eigenvalues();
        for sigma in [0.1, 0.7, 1.9, 3.5] {
            let shifted = a.add_scaled_diagonal(1.0, -sigma, &[1.0; 9]);
            let f = Ldl::factor(&shifted, &(0..9).rev().collect::<Vec<_>>()).unwrap();
            let below = eig.iter().filter(|&&l| l < sigma).count();
            assert_eq!(f.negative_count(), below, "shift {sigma}");
        }
    }

    #[test]
    fn singular_matrix_reports_failure() {
        let a = path_laplacian_plus(4, 0.0);
        assert!(matches!(Ldl::factor(&a, &[0, 1, 2, 3]), Err(Error::SolverFailure(_))));
    }
}
