//! Effective resistance on the level graphs and resistance balls.

use std::collections::BTreeSet;

use crate::besov::strictly_within;
use crate::error::{Error, Result};
use crate::laplacian::GraphOperator;
use crate::linalg::{pcg, CsrMatrix, Ldl};
use crate::model::Fractal;

/// Above this many vertices the grounded system is solved iteratively.
pub const DIRECT_LIMIT: usize = 200_000;
pub const CG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Backend {
    Direct(Ldl),
    Iterative(CsrMatrix),
}

/// Solver for `-H_{Λ_m} u = b` with vertex 0 grounded.
#[derive(Debug, Clone)]
pub struct ResistanceSolver {
    level: usize,
    n: usize,
    backend: Backend,
}

impl ResistanceSolver {
    pub fn new(fractal: &Fractal, m: usize) -> Result<Self> {
        Self::from_operator(&fractal.laplacian(m))
    }

    pub fn from_operator(op: &GraphOperator) -> Result<Self> {
        let n = op.n();
        if n < 2 {
            return Err(Error::InvalidArgument("resistance needs at least two vertices".into()));
        }
        let keep: Vec<usize> = (1..n).collect();
        let grounded = op.matrix().principal_submatrix(&keep).add_scaled_diagonal(-1.0, 0.0, &vec![0.0; n - 1]);
        let backend = if n <= DIRECT_LIMIT {
            // Newest vertices first: eliminates cell interiors before the
            // coarse skeleton.
            let order: Vec<usize> = (0..n - 1).rev().collect();
            Backend::Direct(Ldl::factor(&grounded, &order)?)
        } else {
            Backend::Iterative(grounded)
        };
        Ok(ResistanceSolver { level: op.level(), n, backend })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `-H u = b` with `u_0 = 0`; `b` must sum to zero for a
    /// meaningful potential, only `b[1..]` is used.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let inner = match &self.backend {
            Backend::Direct(f) => f.solve(&b[1..]),
            Backend::Iterative(a) => pcg(a, &b[1..], CG_TOLERANCE, 20 * self.n)?,
        };
        let mut out = Vec::with_capacity(self.n);
        out.push(0.0);
        out.extend(inner);
        Ok(out)
    }

    /// Column `x` of the grounded Green matrix.
    pub fn green_column(&self, x: usize) -> Result<Vec<f64>> {
        let mut b = vec![0.0; self.n];
        if x != 0 {
            b[x] = 1.0;
        }
        self.solve(&b)
    }

    /// Diagonal of the grounded Green matrix, one solve per vertex.
    pub fn green_diagonal(&self) -> Result<Vec<f64>> {
        (0..self.n).map(|x| Ok(self.green_column(x)?[x])).collect()
    }

    pub fn resistance(&self, x: usize, y: usize) -> Result<f64> {
        if x >= self.n || y >= self.n {
            return Err(Error::InvalidArgument(format!("vertex out of range at level {}", self.level)));
        }
        if x == y {
            return Ok(0.0);
        }
        let mut b = vec![0.0; self.n];
        b[x] += 1.0;
        b[y] -= 1.0;
        let u = self.solve(&b)?;
        Ok(u[x] - u[y])
    }

    /// `R(x, ·)` given the Green diagonal.
    pub fn resistances_from(&self, x: usize, diag: &[f64]) -> Result<Vec<f64>> {
        let g = self.green_column(x)?;
        Ok((0..self.n).map(|y| (diag[x] + diag[y] - 2.0 * g[y]).max(0.0)).collect())
    }
}

/// `R(x, y)` at level `m`.
pub fn effective_resistance(fractal: &Fractal, m: usize, x: usize, y: usize) -> Result<f64> {
    ResistanceSolver::new(fractal, m)?.resistance(x, y)
}

/// Separation constant `k`: points of non-adjacent level-`n` cells are at
/// resistance at least `r^{n+k}` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Locality {
    pub k: usize,
    /// `(level, min R / r^level)` over the sampled non-adjacent pairs.
    pub ratios: Vec<(usize, f64)>,
    /// Set when the smallest ratio is suspiciously small.
    pub degenerate: bool,
}

const CALIBRATION_SOURCES: usize = 400;

impl Locality {
    pub fn calibrate(fractal: &Fractal) -> Result<Self> {
        let r = fractal.r();
        let top = fractal.max_level().min(4);
        if top < 2 {
            return Err(Error::InvalidArgument("locality calibration needs levels 2 and up".into()));
        }
        let mut ratios = Vec::new();
        for n in 2..=top {
            let table = fractal.table(n);
            if n == 4 && table.vertex_count() > 5000 {
                break;
            }
            let solver = ResistanceSolver::new(fractal, n)?;
            let diag = solver.green_diagonal()?;
            let inc = table.incidence();
            let adj = table.cell_adjacency();
            let nv = table.vertex_count();
            let stride = nv.div_ceil(CALIBRATION_SOURCES).max(1);
            let mut best = f64::INFINITY;
            for x in (0..nv).step_by(stride) {
                let rx = solver.resistances_from(x, &diag)?;
                let mut near = BTreeSet::new();
                for (c, _) in inc.slots_of(x) {
                    near.insert(c);
                    near.extend(adj[c].iter().map(|&a| a as usize));
                }
                // y is far if none of its cells touches a cell of x.
                for y in 0..nv {
                    if inc.slots_of(y).all(|(c, _)| !near.contains(&c)) {
                        best = best.min(rx[y]);
                    }
                }
            }
            if best.is_finite() {
                ratios.push((n, best / r.powi(n as i32)));
            }
        }
        let min_ratio = ratios.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        if !min_ratio.is_finite() {
            return Ok(Locality { k: 1, ratios, degenerate: true });
        }
        // One extra level absorbs distances from cell interiors to vertices.
        let k = (min_ratio.ln() / r.ln()).ceil().max(0.0) as usize + 1;
        Ok(Locality { k, ratios, degenerate: min_ratio < 1e-3 })
    }
}

/// Vertices of level `m` within resistance `t` of `x`.
pub struct BallFinder<'a> {
    fractal: &'a Fractal,
    level: usize,
    solver: ResistanceSolver,
    diag: Vec<f64>,
    locality: Locality,
}

impl<'a> BallFinder<'a> {
    pub fn new(fractal: &'a Fractal, m: usize, locality: Locality) -> Result<Self> {
        let solver = ResistanceSolver::new(fractal, m)?;
        let diag = solver.green_diagonal()?;
        Ok(BallFinder { fractal, level: m, solver, diag, locality })
    }

    pub fn locality(&self) -> &Locality {
        &self.locality
    }

    /// Candidate vertices for the ball: those in level-`n` cells touching a
    /// level-`n` cell that contains `x`, `n = ⌊log_r t⌋ - k`.
    pub fn candidates(&self, x: usize, t: f64) -> Vec<usize> {
        let table = self.fractal.table(self.level);
        let r = self.fractal.r();
        let raw = (t.ln() / r.ln()).floor() - self.locality.k as f64;
        if raw < 1.0 {
            return (0..table.vertex_count()).collect();
        }
        let n = (raw as usize).min(self.level);
        let anc = ancestors(self.fractal, self.level, n);
        let inc = table.incidence();
        let coarse_adj = self.fractal.table(n).cell_adjacency();
        let mut near = BTreeSet::new();
        for (c, _) in inc.slots_of(x) {
            let a = anc[c] as usize;
            near.insert(a);
            near.extend(coarse_adj[a].iter().map(|&b| b as usize));
        }
        let mut out = BTreeSet::new();
        for c in 0..table.cell_count() {
            if near.contains(&(anc[c] as usize)) {
                out.extend(table.cell(c).iter().map(|&v| v as usize));
            }
        }
        out.into_iter().collect()
    }

    pub fn ball(&self, x: usize, t: f64) -> Result<Vec<usize>> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        let rx = self.solver.resistances_from(x, &self.diag)?;
        Ok(self.candidates(x, t).into_iter().filter(|&y| strictly_within(rx[y], t)).collect())
    }

    pub fn solver(&self) -> &ResistanceSolver {
        &self.solver
    }
}

/// Ancestor at level `n` of every cell of level `m`.
pub fn ancestors(fractal: &Fractal, m: usize, n: usize) -> Vec<u32> {
    let mut anc: Vec<u32> = (0..fractal.table(m).cell_count() as u32).collect();
    for k in (n + 1..=m).rev() {
        let par = fractal.table(k).parents();
        for a in anc.iter_mut() {
            *a = par[*a as usize];
        }
    }
    anc
}
