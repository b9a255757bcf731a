//! Harmonic structure: one-step extension matrices, integration weights and
//! the Gram matrix of cell-harmonic functions.
//!
//! The extension `A_i` pins every prototype point, interior ones included,
//! and fills the rest of `V_1` by minimizing the level-1 energy. For
//! descriptors without interior prototypes this is the usual harmonic
//! extension. With an interior point (the Vicsek centre) it also covers
//! functions whose centre value is free, which is what the tent and
//! piecewise-harmonic spaces need. Harmonic functions proper are the ones
//! whose level-0 values come from [`HarmonicStructure::fill`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pcf::{branch_measures, glue_cells, Dimensions, FractalDescriptor, Word};

#[derive(Debug, Clone)]
pub struct HarmonicStructure {
    desc: FractalDescriptor,
    dims: Dimensions,
    mu: Vec<f64>,
    ext: Vec<DMatrix<f64>>,
    fill: DMatrix<f64>,
    alpha: Vec<f64>,
    gram: DMatrix<f64>,
    trace_residual: f64,
}

/// Largest tolerated relative mismatch in the trace identity.
pub const TRACE_TOLERANCE: f64 = 1e-8;

fn dense_h(desc: &FractalDescriptor) -> DMatrix<f64> {
    desc.h_matrix()
}

/// Schur complement of the symmetric `m` onto `keep`, eliminating the rest.
fn schur(m: &DMatrix<f64>, keep: &[usize]) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let drop: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kk = m.select_rows(keep).select_columns(keep);
    if drop.is_empty() {
        return Ok(kk);
    }
    let kd = m.select_rows(keep).select_columns(&drop);
    let dd = m.select_rows(&drop).select_columns(&drop);
    let lu = dd.lu();
    let x = lu.solve(&kd.transpose()).ok_or(Error::SingularInterior)?;
    Ok(kk - kd * x)
}

impl HarmonicStructure {
    pub fn derive(desc: &FractalDescriptor) -> Result<Self> {
        let n = desc.branches();
        let v0 = desc.v0size();
        let dims = Dimensions::of(desc);
        let mu = branch_measures(desc, dims.d_h);
        let h = dense_h(desc);

        let words: Vec<Word> = (0..n).map(|i| Word::EMPTY.child(i, n)).collect();
        let (cells, count) = glue_cells(desc, &words)?;
        let mut level1 = DMatrix::<f64>::zeros(count, count);
        for i in 0..n {
            let c = &cells[i * v0..(i + 1) * v0];
            let g = 1.0 / desc.weights()[i];
            for a in 0..v0 {
                for b in 0..v0 {
                    level1[(c[a] as usize, c[b] as usize)] += g * h[(a, b)];
                }
            }
        }

        // Fill V_1 \ V_0 from all prototype values.
        let inner: Vec<usize> = (v0..count).collect();
        let protos: Vec<usize> = (0..v0).collect();
        let mut values = DMatrix::<f64>::zeros(count, v0);
        for q in 0..v0 {
            values[(q, q)] = 1.0;
        }
        if !inner.is_empty() {
            let ii = level1.select_rows(&inner).select_columns(&inner);
            let ip = level1.select_rows(&inner).select_columns(&protos);
            let sol = ii.lu().solve(&(-ip)).ok_or(Error::SingularInterior)?;
            if sol.iter().any(|x| !x.is_finite()) {
                return Err(Error::SingularInterior);
            }
            for (k, &v) in inner.iter().enumerate() {
                for q in 0..v0 {
                    values[(v, q)] = sol[(k, q)];
                }
            }
        }
        let ext: Vec<DMatrix<f64>> = (0..n)
            .map(|i| {
                let rows: Vec<usize> = cells[i * v0..(i + 1) * v0].iter().map(|&x| x as usize).collect();
                values.select_rows(&rows)
            })
            .collect();

        // Trace identity on the boundary.
        let boundary = desc.boundary().to_vec();
        let s1 = schur(&level1, &boundary)?;
        let s0 = schur(&h, &boundary)?;
        let scale = s0.amax();
        let trace_residual = (&s1 - &s0).amax() / scale;
        if !(trace_residual <= TRACE_TOLERANCE) {
            return Err(Error::HarmonicStructureViolation { residual: trace_residual });
        }

        // Level-0 harmonic fill of interior prototype points.
        let interior = desc.interior();
        let nb = boundary.len();
        let mut fill = DMatrix::<f64>::zeros(v0, nb);
        for (k, &q) in boundary.iter().enumerate() {
            fill[(q, k)] = 1.0;
        }
        if !interior.is_empty() {
            let ii = h.select_rows(&interior).select_columns(&interior);
            let ib = h.select_rows(&interior).select_columns(&boundary);
            let sol = ii.lu().solve(&(-ib)).ok_or(Error::SingularInterior)?;
            for (k, &q) in interior.iter().enumerate() {
                for j in 0..nb {
                    fill[(q, j)] = sol[(k, j)];
                }
            }
        }

        let alpha = integration_weights(&ext, &mu)?;
        let gram = gram_matrix(&ext, &mu, &alpha)?;
        Ok(HarmonicStructure {
            desc: desc.clone(),
            dims,
            mu,
            ext,
            fill,
            alpha,
            gram,
            trace_residual,
        })
    }

    pub fn descriptor(&self) -> &FractalDescriptor {
        &self.desc
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn v0size(&self) -> usize {
        self.desc.v0size()
    }

    /// `μ_i = r_i^{d_H}`.
    pub fn branch_measures(&self) -> &[f64] {
        &self.mu
    }

    /// `A_i`, 0-based branch.
    pub fn extension(&self, i: usize) -> &DMatrix<f64> {
        &self.ext[i]
    }

    /// Boundary data to level-0 values (interior prototype points harmonic).
    pub fn fill_matrix(&self) -> &DMatrix<f64> {
        &self.fill
    }

    pub fn fill(&self, boundary_values: &[f64]) -> Vec<f64> {
        assert_eq!(boundary_values.len(), self.desc.boundary().len());
        (&self.fill * DVector::from_column_slice(boundary_values)).as_slice().to_vec()
    }

    /// Relative trace-identity mismatch found while deriving.
    pub fn trace_residual(&self) -> f64 {
        self.trace_residual
    }

    /// `α` with `∫ h dμ = Σ_q α_q h(q)`.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `G_{ab} = ∫ h_a h_b dμ` for the cell-harmonic basis.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Values on `F_i V_0` from values on `V_0`.
    pub fn extend_once(&self, i: usize, v: &[f64]) -> Vec<f64> {
        let a = &self.ext[i];
        let n = v.len();
        (0..n).map(|r| (0..n).map(|c| a[(r, c)] * v[c]).sum()).collect()
    }

    /// Values on `F_w V_0`, applying `A_{w_1}` first and `A_{w_n}` last.
    pub fn extend_word(&self, w: &Word, v: &[f64]) -> Vec<f64> {
        let mut cur = v.to_vec();
        for l in w.letters(self.desc.branches()) {
            cur = self.extend_once(l, &cur);
        }
        cur
    }

    /// `E_0(v) = -⟨H v, v⟩`.
    pub fn energy0(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let mut e = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                let hab = self.desc.h(a, b);
                if hab != 0.0 {
                    let d = v[a] - v[b];
                    e += hab * d * d;
                }
            }
        }
        e
    }

    /// `∫ h dμ` for the cell-harmonic function with level-0 values `v`.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        self.alpha.iter().zip(v).map(|(a, x)| a * x).sum()
    }

    /// `∫ h g dμ` for cell-harmonic `h`, `g`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = u.len();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += u[a] * self.gram[(a, b)] * v[b];
            }
        }
        s
    }
}

/// Solve `α = Σ μ_i A_i^T α`, `Σ α = 1`.
fn integration_weights(ext: &[DMatrix<f64>], mu: &[f64]) -> Result<Vec<f64>> {
    let n = ext[0].nrows();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for (a, &m) in ext.iter().zip(mu) {
        t += a.transpose() * m;
    }
    let mut sys = t.clone() - DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for c in 0..n {
        sys[(n - 1, c)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let alpha = sys.lu().solve(&rhs).ok_or(Error::FixedPointDivergence(f64::INFINITY))?;
    let residual = (&t * &alpha - &alpha).amax();
    if !(residual <= 1e-12) || alpha.iter().any(|&x| x < -1e-14) {
        return Err(Error::FixedPointDivergence(residual));
    }
    Ok(alpha.iter().map(|&x| x.max(0.0)).collect())
}

/// Solve `G = Σ μ_i A_i^T G A_i` with `⟨1, G 1⟩ = 1` and `G 1 = α`.
fn gram_matrix(ext: &[DMatrix<f64>], mu: &[f64], alpha: &[f64]) -> Result<DMatrix<f64>> {
    let n = ext[0].nrows();
    let nn = n * n;
    // Column-major vec: vec(A^T G A) = (A^T ⊗ A^T) vec(G).
    let mut k = DMatrix::<f64>::zeros(nn, nn);
    for (a, &m) in ext.iter().zip(mu) {
        let at = a.transpose();
        k += at.kronecker(&at) * m;
    }
    let mut sys = k.clone() - DMatrix::<f64>::identity(nn, nn);
    for c in 0..nn {
        sys[(nn - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(nn);
    rhs[nn - 1] = 1.0;
    let g = sys.lu().solve(&rhs).ok_or(Error::FixedPointDivergence(f64::INFINITY))?;
    let residual = (&k * &g - &g).amax();
    let gm = DMatrix::from_column_slice(n, n, g.as_slice());
    let gm = (&gm + gm.transpose()) * 0.5;
    let row_err = (0..n)
        .map(|a| ((0..n).map(|b| gm[(a, b)]).sum::<f64>() - alpha[a]).abs())
        .fold(0.0, f64::max);
    if !(residual <= 1e-12) || row_err > 1e-10 {
        return Err(Error::FixedPointDivergence(residual.max(row_err)));
    }
    Ok(gm)
}
