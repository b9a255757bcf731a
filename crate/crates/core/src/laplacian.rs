//! Level graph Laplacians `H_{Λ_m}` and energies.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::pcf::{FractalDescriptor, VertexTable};

/// `H_{Λ_m}` on canonical ids: `-⟨H f, f⟩ = Σ_w r_w^{-1} E_0(f ∘ F_w)`.
#[derive(Debug, Clone)]
pub struct GraphOperator {
    level: usize,
    matrix: CsrMatrix,
}

impl GraphOperator {
    pub fn assemble(desc: &FractalDescriptor, table: &VertexTable) -> Self {
        let edges = desc.edges();
        let n = table.vertex_count();
        let mut trip = Vec::with_capacity(table.cell_count() * edges.len() * 4);
        for (k, &rw) in table.partition().resistances().iter().enumerate() {
            let c = table.cell(k);
            for &(a, b) in &edges {
                let g = desc.h(a, b) / rw;
                let (x, y) = (c[a], c[b]);
                trip.push((x, y, g));
                trip.push((y, x, g));
                trip.push((x, x, -g));
                trip.push((y, y, -g));
            }
        }
        GraphOperator { level: table.level(), matrix: CsrMatrix::from_triplets(n, &trip) }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `H f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        Ok(self.matrix.mul_vec(f))
    }

    /// `E_m(f) = -⟨H f, f⟩`, evaluated edge by edge so it stays nonnegative.
    pub fn energy(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        let mut e = 0.0;
        for (i, j, v) in self.matrix.entries() {
            if j > i {
                let d = f[i] - f[j];
                e += v * d * d;
            }
        }
        Ok(e)
    }

    /// Cells of `table` that contribute the conductance between `x` and `y`.
    pub fn contributing_cells(&self, desc: &FractalDescriptor, table: &VertexTable, x: usize, y: usize) -> Vec<usize> {
        let edges = desc.edges();
        (0..table.cell_count())
            .filter(|&k| {
                let c = table.cell(k);
                edges.iter().any(|&(a, b)| {
                    (c[a] as usize == x && c[b] as usize == y) || (c[a] as usize == y && c[b] as usize == x)
                })
            })
            .collect()
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: f.len() });
        }
        Ok(())
    }
}

/// `E_m(f)` directly from the cell sum (independent of the assembled matrix).
pub fn cell_energy(desc: &FractalDescriptor, table: &VertexTable, f: &[f64]) -> Result<f64> {
    if f.len() != table.vertex_count() {
        return Err(Error::DimensionMismatch { expected: table.vertex_count(), got: f.len() });
    }
    let edges = desc.edges();
    let mut e = 0.0;
    for (k, &rw) in table.partition().resistances().iter().enumerate() {
        let c = table.cell(k);
        let local: f64 = edges
            .iter()
            .map(|&(a, b)| {
                let d = f[c[a] as usize] - f[c[b] as usize];
                desc.h(a, b) * d * d
            })
            .sum();
        e += local / rw;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf::{build_vertex_table, presets};

    #[test]
    fn level_zero_is_h() {
        let d = presets::vicsek();
        let t = build_vertex_table(&d, 0).unwrap();
        let op = GraphOperator::assemble(&d, &t);
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(op.matrix().get(a, b), d.h(a, b));
            }
        }
    }

    #[test]
    fn interval_level_one() {
        let d = presets::interval();
        let t = build_vertex_table(&d, 1).unwrap();
        let op = GraphOperator::assemble(&d, &t);
        // ids: 0 = left end, 1 = right end, 2 = midpoint
        assert_eq!(op.matrix().diagonal(), vec![-2.0, -2.0, -4.0]);
        assert_eq!(op.matrix().get(0, 2), 2.0);
        assert_eq!(op.contributing_cells(&d, &t, 2, 1), vec![1]);
    }

    #[test]
    fn interval_linear_function_has_unit_energy() {
        let d = presets::interval();
        for m in 0..8 {
            let h = crate::pcf::VertexHierarchy::build(&d, m).unwrap();
            let t = h.level(m);
            let f: Vec<f64> = (0..t.vertex_count())
                .map(|id| {
                    let (w, a) = h.witness(id);
                    let letters = w.letters(2);
                    let mut x = 0.0;
                    let mut s = 1.0;
                    for l in letters {
                        s *= 0.5;
                        x += l as f64 * s;
                    }
                    x + a as f64 * s
                })
                .collect();
            let op = GraphOperator::assemble(&d, t);
            assert!((op.energy(&f).unwrap() - 1.0).abs() < 1e-12, "level {m}");
            assert!((cell_energy(&d, t, &f).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
