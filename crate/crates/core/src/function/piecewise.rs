use crate::error::{Error, Result};
use crate::model::Fractal;
use crate::pcf::VertexTable;

/// Values on `V_{Λ_m}`, indexed by canonical id.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    pub level: usize,
    pub values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(level: usize, values: Vec<f64>) -> Self {
        VertexFunction { level, values }
    }

    pub fn constant(fractal: &Fractal, level: usize, c: f64) -> Self {
        VertexFunction { level, values: vec![c; fractal.table(level).vertex_count()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        VertexFunction { level: self.level, values: self.values.iter().map(|x| c * x).collect() }
    }
}

/// A function harmonic inside every cell of `Λ_m`, stored by its values on
/// each cell's `F_w V_0`. Neighbouring cells may disagree at shared points.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHarmonic {
    level: usize,
    v0size: usize,
    values: Vec<f64>,
}

/// Discrepancy allowed at glued points for a function to count as continuous.
pub const CONTINUITY_TOLERANCE: f64 = 1e-12;

impl PiecewiseHarmonic {
    pub fn from_cells(level: usize, v0size: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len() % v0size, 0);
        PiecewiseHarmonic { level, v0size, values }
    }

    /// Continuous function determined by its vertex values.
    pub fn from_vertex(table: &VertexTable, f: &[f64]) -> Result<Self> {
        if f.len() < table.vertex_count() {
            return Err(Error::DimensionMismatch { expected: table.vertex_count(), got: f.len() });
        }
        let values = table.cell_vertices().iter().map(|&v| f[v as usize]).collect();
        Ok(PiecewiseHarmonic { level: table.level(), v0size: table.v0size(), values })
    }

    /// Constant `c[k]` on cell `k`.
    pub fn piecewise_constant(level: usize, v0size: usize, c: &[f64]) -> Self {
        let values = c.iter().flat_map(|&x| std::iter::repeat_n(x, v0size)).collect();
        PiecewiseHarmonic { level, v0size, values }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn v0size(&self) -> usize {
        self.v0size
    }

    pub fn cell_count(&self) -> usize {
        self.values.len() / self.v0size
    }

    pub fn cell(&self, k: usize) -> &[f64] {
        &self.values[k * self.v0size..(k + 1) * self.v0size]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest disagreement between cells at a shared vertex.
    pub fn discontinuity(&self, table: &VertexTable) -> f64 {
        let mut first = vec![f64::NAN; table.vertex_count()];
        let mut worst = 0.0f64;
        for (s, &v) in table.cell_vertices().iter().enumerate() {
            let x = self.values[s];
            let slot = &mut first[v as usize];
            if slot.is_nan() {
                *slot = x;
            } else {
                worst = worst.max((x - *slot).abs());
            }
        }
        worst
    }

    pub fn is_continuous(&self, table: &VertexTable) -> bool {
        let scale = self.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        self.discontinuity(table) <= CONTINUITY_TOLERANCE * scale
    }

    /// Vertex values, averaging the cells that meet at each vertex.
    pub fn vertex_average(&self, table: &VertexTable) -> VertexFunction {
        let n = table.vertex_count();
        let mut sum = vec![0.0; n];
        let mut cnt = vec![0u32; n];
        for (s, &v) in table.cell_vertices().iter().enumerate() {
            sum[v as usize] += self.values[s];
            cnt[v as usize] += 1;
        }
        let values = sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect();
        VertexFunction::new(self.level, values)
    }

    /// The same function described on the finer cells of level `m`.
    pub fn refine(&self, fractal: &Fractal, m: usize) -> PiecewiseHarmonic {
        assert!(m >= self.level);
        let mut cur = self.clone();
        for k in self.level + 1..=m {
            cur = cur.refine_once(fractal, k);
        }
        cur
    }

    fn refine_once(&self, fractal: &Fractal, k: usize) -> PiecewiseHarmonic {
        let hs = fractal.structure();
        let n = fractal.descriptor().branches();
        let fine = fractal.table(k);
        let coarse = fractal.table(k - 1);
        let v0 = self.v0size;
        let mut out = Vec::with_capacity(fine.cell_count() * v0);
        for (c, w) in fine.partition().words().iter().enumerate() {
            let p = fine.parents()[c] as usize;
            let plen = coarse.partition().words()[p].len();
            let mut vals = self.cell(p).to_vec();
            for &l in &w.letters(n)[plen..] {
                vals = hs.extend_once(l, &vals);
            }
            out.extend_from_slice(&vals);
        }
        PiecewiseHarmonic { level: k, v0size: v0, values: out }
    }

    /// `∫ f dμ`.
    pub fn integral(&self, fractal: &Fractal) -> f64 {
        let mu = fractal.table(self.level).partition().measures();
        let hs = fractal.structure();
        (0..self.cell_count()).map(|k| mu[k] * hs.integrate(self.cell(k))).sum()
    }

    /// `E_w(f)` for every cell of the function's own level.
    pub fn cell_averages(&self, fractal: &Fractal) -> Vec<f64> {
        let hs = fractal.structure();
        (0..self.cell_count()).map(|k| hs.integrate(self.cell(k))).collect()
    }

    /// `‖f‖_2`, exact through the Gram matrix.
    pub fn l2_norm(&self, fractal: &Fractal) -> f64 {
        let mu = fractal.table(self.level).partition().measures();
        let hs = fractal.structure();
        let s: f64 = (0..self.cell_count())
            .map(|k| mu[k] * hs.inner(self.cell(k), self.cell(k)))
            .sum();
        s.max(0.0).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        PiecewiseHarmonic {
            level: self.level,
            v0size: self.v0size,
            values: self.values.iter().map(|x| c * x).collect(),
        }
    }

    pub fn sub(&self, other: &PiecewiseHarmonic) -> PiecewiseHarmonic {
        assert_eq!(self.level, other.level);
        PiecewiseHarmonic {
            level: self.level,
            v0size: self.v0size,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Values on the cells of level `m` of the cell-harmonic function with
/// level-0 values `v0`.
pub fn extend_cells(fractal: &Fractal, v0: &[f64], m: usize) -> PiecewiseHarmonic {
    let base = PiecewiseHarmonic::from_cells(0, v0.len(), v0.to_vec());
    base.refine(fractal, m)
}

/// Harmonic extension of boundary data to `V_{Λ_m}`.
pub fn harmonic_extend(fractal: &Fractal, boundary: &[f64], m: usize) -> Result<VertexFunction> {
    let nb = fractal.descriptor().boundary().len();
    if boundary.len() != nb {
        return Err(Error::DimensionMismatch { expected: nb, got: boundary.len() });
    }
    let v0 = fractal.structure().fill(boundary);
    Ok(extend_level0(fractal, &v0, m))
}

/// Vertex values at level `m` of the cell-harmonic extension of all
/// prototype values.
pub fn extend_level0(fractal: &Fractal, v0: &[f64], m: usize) -> VertexFunction {
    let cells = extend_cells(fractal, v0, m);
    let table = fractal.table(m);
    let mut out = vec![0.0; table.vertex_count()];
    for (s, &v) in table.cell_vertices().iter().enumerate() {
        out[v as usize] = cells.values[s];
    }
    VertexFunction::new(m, out)
}

/// Continuous cell-harmonic interpolation from `V_{Λ_m}` to `V_{Λ_{m+1}}`.
pub fn prolong(fractal: &Fractal, m: usize, f: &[f64]) -> Result<Vec<f64>> {
    let ph = PiecewiseHarmonic::from_vertex(fractal.table(m), f)?;
    let fine = ph.refine(fractal, m + 1);
    let table = fractal.table(m + 1);
    let mut out = vec![0.0; table.vertex_count()];
    for (s, &v) in table.cell_vertices().iter().enumerate() {
        out[v as usize] = fine.values[s];
    }
    Ok(out)
}
