//! Combinatorial description of a p.c.f. self-similar set.
//!
//! A descriptor never realizes the contractions geometrically. Everything the
//! analysis needs is the boundary energy `H`, the resistance weights `r` and
//! the identifications between cells: which cell vertices are glued together
//! (`gluings`) and which cell vertices coincide with prototype vertices
//! (`fixed`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `F_i q_a = F_j q_b`, branches 0-based internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gluing {
    pub i: usize,
    pub a: usize,
    pub j: usize,
    pub b: usize,
}

/// `q_vertex = F_branch q_image_of`, branch 0-based internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPoint {
    pub vertex: usize,
    pub branch: usize,
    pub image_of: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalDescriptor {
    name: String,
    branches: usize,
    v0size: usize,
    boundary: Vec<usize>,
    gluings: Vec<Gluing>,
    fixed: Vec<FixedPoint>,
    r: Vec<f64>,
    /// Row-major `v0size x v0size`.
    h: Vec<f64>,
}

/// On-disk schema. Branch indices are 1-based, prototype vertices 0-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorDocument {
    pub name: String,
    pub branches: usize,
    pub v0: usize,
    pub boundary: Vec<usize>,
    pub gluings: Vec<[usize; 4]>,
    pub r: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    /// Optional `[c, i, a]` triples meaning `q_c = F_i q_a`. When omitted,
    /// branch `c + 1` is assumed to fix prototype vertex `c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<[usize; 3]>>,
}

impl FractalDescriptor {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn v0size(&self) -> usize {
        self.v0size
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, q: usize) -> bool {
        self.boundary.binary_search(&q).is_ok()
    }

    /// Prototype vertices that are not on the boundary (e.g. the Vicsek centre).
    pub fn interior(&self) -> Vec<usize> {
        (0..self.v0size).filter(|&q| !self.is_boundary(q)).collect()
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn fixed_points(&self) -> &[FixedPoint] {
        &self.fixed
    }

    pub fn weights(&self) -> &[f64] {
        &self.r
    }

    /// Base scale `r = min_i r_i`.
    pub fn base_scale(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h(&self, a: usize, b: usize) -> f64 {
        self.h[a * self.v0size + b]
    }

    pub fn h_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.v0size, self.v0size, &self.h)
    }

    /// Prototype pairs `a < b` with positive conductance.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.v0size;
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.h(a, b) > 0.0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Longest word whose base-`N` code still fits into 63 bits.
    pub fn max_word_len(&self) -> usize {
        let bits = (self.branches as f64).log2();
        (63.0 / bits).floor() as usize
    }

    pub fn from_document(doc: DescriptorDocument) -> Result<Self> {
        let DescriptorDocument { name, branches, v0, boundary, gluings, r, h, fixed } = doc;
        if branches < 2 {
            return Err(Error::Schema(format!("branches must be >= 2, got {branches}")));
        }
        if branches > 255 {
            return Err(Error::Schema("at most 255 branches are supported".into()));
        }
        if v0 < 2 {
            return Err(Error::Schema(format!("v0 must be >= 2, got {v0}")));
        }
        let mut boundary = boundary;
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.len() < 2 || boundary.iter().any(|&q| q >= v0) {
            return Err(Error::Schema("boundary must list at least two vertices in 0..v0".into()));
        }
        if r.len() != branches {
            return Err(Error::Schema(format!("expected {branches} weights, got {}", r.len())));
        }
        if let Some(bad) = r.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Schema(format!("resistance weight {bad} outside (0, 1)")));
        }
        if h.len() != v0 || h.iter().any(|row| row.len() != v0) {
            return Err(Error::Schema(format!("H must be {v0}x{v0}")));
        }
        let mut glue = Vec::with_capacity(gluings.len());
        for [i, a, j, b] in gluings {
            if i == 0 || j == 0 || i > branches || j > branches {
                return Err(Error::Schema(format!("gluing branch out of range: [{i},{a},{j},{b}]")));
            }
            if i == j {
                return Err(Error::Schema(format!("gluing within one cell: [{i},{a},{j},{b}]")));
            }
            if a >= v0 || b >= v0 {
                return Err(Error::Schema(format!("gluing vertex out of range: [{i},{a},{j},{b}]")));
            }
            glue.push(Gluing { i: i - 1, a, j: j - 1, b });
        }
        let fixed = match fixed {
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for [c, i, a] in list {
                    if c >= v0 || a >= v0 || i == 0 || i > branches {
                        return Err(Error::Schema(format!("fixed entry out of range: [{c},{i},{a}]")));
                    }
                    out.push(FixedPoint { vertex: c, branch: i - 1, image_of: a });
                }
                out
            }
            None => {
                if branches < v0 {
                    return Err(Error::Schema(
                        "a `fixed` table is required when branches < v0".into(),
                    ));
                }
                (0..v0).map(|c| FixedPoint { vertex: c, branch: c, image_of: c }).collect()
            }
        };
        let flat: Vec<f64> = h.into_iter().flatten().collect();
        let desc = FractalDescriptor {
            name,
            branches,
            v0size: v0,
            boundary,
            gluings: glue,
            fixed,
            r,
            h: flat,
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn to_document(&self) -> DescriptorDocument {
        let n = self.v0size;
        DescriptorDocument {
            name: self.name.clone(),
            branches: self.branches,
            v0: n,
            boundary: self.boundary.clone(),
            gluings: self.gluings.iter().map(|g| [g.i + 1, g.a, g.j + 1, g.b]).collect(),
            r: self.r.clone(),
            h: (0..n).map(|a| self.h[a * n..(a + 1) * n].to_vec()).collect(),
            fixed: Some(
                self.fixed.iter().map(|f| [f.vertex, f.branch + 1, f.image_of]).collect(),
            ),
        }
    }

    /// Parse and validate a JSON descriptor document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DescriptorDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_document(doc)
    }

    /// Canonical JSON rendering (stable key order); used for content hashing.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("descriptor serializes")
    }

    fn validate(&self) -> Result<()> {
        let n = self.v0size;
        let scale = self.h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Err(Error::InvalidLaplacian("H is zero".into()));
        }
        let tol = 1e-12 * scale;
        for a in 0..n {
            let mut row = 0.0;
            for b in 0..n {
                let x = self.h(a, b);
                if !x.is_finite() {
                    return Err(Error::InvalidLaplacian("non-finite entry".into()));
                }
                if (x - self.h(b, a)).abs() > tol {
                    return Err(Error::InvalidLaplacian(format!("not symmetric at ({a},{b})")));
                }
                if a != b && x < -tol {
                    return Err(Error::InvalidLaplacian(format!("negative off-diagonal at ({a},{b})")));
                }
                row += x;
            }
            if row.abs() > 1e-10 * scale {
                return Err(Error::InvalidLaplacian(format!("row {a} sums to {row:e}")));
            }
        }
        // Kernel equals the constants iff the conductance graph is connected.
        let mut comp = DisjointSets::new(n);
        for (a, b) in self.edges() {
            comp.union(a, b);
        }
        if comp.count() != 1 {
            return Err(Error::InvalidLaplacian("kernel is larger than the constants".into()));
        }
        let mut cells = DisjointSets::new(self.branches);
        for g in &self.gluings {
            cells.union(g.i, g.j);
        }
        if cells.count() != 1 {
            return Err(Error::DisconnectedGluing);
        }
        for c in 0..n {
            if !self.fixed.iter().any(|f| f.vertex == c) {
                return Err(Error::Schema(format!(
                    "prototype vertex {c} is not the image of any cell vertex"
                )));
            }
        }
        for (k, f) in self.fixed.iter().enumerate() {
            if self.fixed[..k]
                .iter()
                .any(|g| g.branch == f.branch && g.image_of == f.image_of && g.vertex != f.vertex)
            {
                return Err(Error::Schema(format!(
                    "cell vertex ({}, {}) fixed to two prototype vertices",
                    f.branch + 1,
                    f.image_of
                )));
            }
        }
        Ok(())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Built-in descriptors.
pub mod presets {
    use super::*;

    pub const NAMES: &[&str] = &["interval", "sg", "vicsek", "vicsek2k1:<k>"];

    pub fn by_name(name: &str) -> Result<FractalDescriptor> {
        match name {
            "interval" => Ok(interval()),
            "sg" => Ok(sierpinski_gasket()),
            "vicsek" => Ok(vicsek()),
            other => {
                if let Some(k) = other.strip_prefix("vicsek2k1:") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::Schema(format!("bad Vicsek order in {other:?}")))?;
                    vicsek_2k1(k)
                } else {
                    Err(Error::Schema(format!(
                        "unknown preset {other:?}; known: {}",
                        NAMES.join(", ")
                    )))
                }
            }
        }
    }

    pub fn interval() -> FractalDescriptor {
        FractalDescriptor::from_document(DescriptorDocument {
            name: "interval".into(),
            branches: 2,
            v0: 2,
            boundary: vec![0, 1],
            gluings: vec![[1, 1, 2, 0]],
            r: vec![0.5, 0.5],
            h: vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            fixed: Some(vec![[0, 1, 0], [1, 2, 1]]),
        })
        .expect("interval preset is valid")
    }

    /// Standard gasket: `F_i` fixes `q_i`, the cells meet pairwise at midpoints.
    pub fn sierpinski_gasket() -> FractalDescriptor {
        FractalDescriptor::from_document(DescriptorDocument {
            name: "sg".into(),
            branches: 3,
            v0: 3,
            boundary: vec![0, 1, 2],
            gluings: vec![[1, 1, 2, 0], [1, 2, 3, 0], [2, 2, 3, 1]],
            r: vec![0.6; 3],
            h: vec![
                vec![-2.0, 1.0, 1.0],
                vec![1.0, -2.0, 1.0],
                vec![1.0, 1.0, -2.0],
            ],
            fixed: Some(vec![[0, 1, 0], [1, 2, 1], [2, 3, 2]]),
        })
        .expect("gasket preset is valid")
    }

    /// Vicsek cross on the enlarged graph: corners `q_0..q_3` (`q_2` opposite
    /// `q_0`), centre `q_4` joined to each corner by a unit conductance.
    pub fn vicsek() -> FractalDescriptor {
        let mut d = vicsek_2k1(1).expect("vicsek preset is valid");
        d.name = "vicsek".into();
        d
    }

    /// `(2k+1)`-Vicsek set: `4k+1` cells, `2k+1` along each diagonal.
    ///
    /// Branches `1..=4` are the corner cells, branch 5 the centre, then the
    /// `k-1` intermediate cells of each arm, corner by corner.
    pub fn vicsek_2k1(k: usize) -> Result<FractalDescriptor> {
        if k == 0 {
            return Err(Error::Schema("Vicsek order k must be >= 1".into()));
        }
        let n = 4 * k + 1;
        let centre_branch = 5;
        let opposite = |c: usize| (c + 2) % 4;
        let arm_branch = |c: usize, pos: usize| -> usize {
            match pos {
                0 => c + 1,
                p if p == k => centre_branch,
                p => 6 + c * (k - 1) + (p - 1),
            }
        };
        let mut gluings = Vec::new();
        for c in 0..4 {
            for pos in 0..k {
                gluings.push([arm_branch(c, pos), opposite(c), arm_branch(c, pos + 1), c]);
            }
        }
        let mut h = vec![vec![0.0; 5]; 5];
        for c in 0..4 {
            h[c][4] = 1.0;
            h[4][c] = 1.0;
            h[c][c] = -1.0;
        }
        h[4][4] = -4.0;
        let mut fixed: Vec<[usize; 3]> = (0..4).map(|c| [c, c + 1, c]).collect();
        fixed.push([4, centre_branch, 4]);
        FractalDescriptor::from_document(DescriptorDocument {
            name: format!("vicsek2k1:{k}"),
            branches: n,
            v0: 5,
            boundary: vec![0, 1, 2, 3],
            gluings,
            r: vec![1.0 / (2 * k + 1) as f64; n],
            h,
            fixed: Some(fixed),
        })
    }
}
