use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite `a`. Stops once `‖r‖ ≤ tol ‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SolverFailure("matrix is not positive definite".into()));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let norm_r = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm_r <= tol * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure(format!("conjugate gradients did not reach {tol:e} in {max_iter} steps")))
}
