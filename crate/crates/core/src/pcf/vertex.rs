//! Canonical vertex ids for `V_{Λ_m}`.
//!
//! A cell-local slot `(w, a)` names the point `F_w q_a`. Slots are first
//! shortened through the fixed-point table (`F_i q_a = q_c` turns `(v·i, a)`
//! into `(v, c)`), then merged with every slot reachable through the gluing
//! relations of their last letter. Ids are handed out level by level, so
//! `V_{Λ_m}` is always the prefix `0..count(m)` and the ring `V̊_{Λ_m}` is the
//! range `count(m-1)..count(m)`.

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::pcf::word::{Partition, Word, DEFAULT_CELL_BUDGET};
use crate::pcf::{Dimensions, FractalDescriptor};

const NO_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Slot {
    word: Word,
    proto: u8,
}

/// Size limits applied while building a hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub cells: usize,
    pub vertices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { cells: DEFAULT_CELL_BUDGET, vertices: 4 * DEFAULT_CELL_BUDGET }
    }
}

/// One level of the hierarchy.
#[derive(Debug, Clone)]
pub struct VertexTable {
    partition: Partition,
    /// `cell * v0size + a` to canonical id.
    cell_vertices: Vec<u32>,
    count: usize,
    previous: usize,
    /// Ancestor of each cell in the previous level; empty at level 0.
    parent: Vec<u32>,
    v0size: usize,
}

impl VertexTable {
    pub fn level(&self) -> usize {
        self.partition.level()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cell_count(&self) -> usize {
        self.partition.len()
    }

    /// `|V_{Λ_m}|`.
    pub fn vertex_count(&self) -> usize {
        self.count
    }

    /// Ids of `V̊_{Λ_m}`; for level 0 this is all of `V_0`.
    pub fn ring(&self) -> Range<usize> {
        self.previous..self.count
    }

    pub fn in_ring(&self, id: usize) -> bool {
        self.ring().contains(&id)
    }

    pub fn v0size(&self) -> usize {
        self.v0size
    }

    pub fn cell(&self, k: usize) -> &[u32] {
        &self.cell_vertices[k * self.v0size..(k + 1) * self.v0size]
    }

    pub fn cell_vertices(&self) -> &[u32] {
        &self.cell_vertices
    }

    pub fn vertex(&self, cell: usize, proto: usize) -> usize {
        self.cell_vertices[cell * self.v0size + proto] as usize
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    /// For every vertex, the `(cell, proto)` slots that carry it, CSR-packed.
    pub fn incidence(&self) -> Incidence {
        let mut offsets = vec![0usize; self.count + 1];
        for &v in &self.cell_vertices {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..self.count {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut slots = vec![0u32; self.cell_vertices.len()];
        for (s, &v) in self.cell_vertices.iter().enumerate() {
            slots[fill[v as usize]] = s as u32;
            fill[v as usize] += 1;
        }
        Incidence { offsets, slots, v0size: self.v0size }
    }

    /// Cells sharing at least one vertex with each cell, sorted, self excluded.
    pub fn cell_adjacency(&self) -> Vec<Vec<u32>> {
        let inc = self.incidence();
        let mut adj = vec![Vec::new(); self.cell_count()];
        for v in 0..self.count {
            let cells: Vec<u32> = inc.slots_of(v).map(|(c, _)| c as u32).collect();
            for &a in &cells {
                for &b in &cells {
                    if a != b {
                        adj[a as usize].push(b);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Vertex-to-vertex adjacency through positive prototype conductances.
    pub fn vertex_degrees(&self, desc: &FractalDescriptor) -> Vec<usize> {
        let edges = desc.edges();
        let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); self.count];
        for k in 0..self.cell_count() {
            let c = self.cell(k);
            for &(a, b) in &edges {
                nbrs[c[a] as usize].push(c[b]);
                nbrs[c[b] as usize].push(c[a]);
            }
        }
        nbrs.into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l.dedup();
                l.len()
            })
            .collect()
    }
}

pub struct Incidence {
    offsets: Vec<usize>,
    slots: Vec<u32>,
    v0size: usize,
}

impl Incidence {
    /// `(cell, proto)` pairs for vertex `v`.
    pub fn slots_of(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.v0size;
        self.slots[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(move |&s| (s as usize / n, s as usize % n))
    }

    pub fn multiplicity(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// Nested vertex tables for levels `0..=max_level`.
#[derive(Debug, Clone)]
pub struct VertexHierarchy {
    desc: FractalDescriptor,
    dims: Dimensions,
    levels: Vec<VertexTable>,
    /// Birth slot of every id.
    witness: Vec<(Word, usize)>,
}

struct Builder<'a> {
    desc: &'a FractalDescriptor,
    keys: HashMap<Slot, u32>,
    parent: Vec<u32>,
    id: Vec<u32>,
    witness: Vec<(Word, usize)>,
    /// `fixed_by[i * v0 + a]`: prototype `c` with `F_i q_a = q_c`.
    fixed_by: Vec<Option<u8>>,
    /// Gluing partners of cell-local slot `(i, a)`: list of `(j, b)`.
    glued: Vec<Vec<(usize, usize)>>,
}

impl<'a> Builder<'a> {
    fn new(desc: &'a FractalDescriptor) -> Result<Self> {
        let n = desc.branches();
        let v0 = desc.v0size();
        let mut fixed_by: Vec<Option<u8>> = vec![None; n * v0];
        for f in desc.fixed_points() {
            fixed_by[f.branch * v0 + f.image_of] = Some(f.vertex as u8);
        }
        let mut glued = vec![Vec::new(); n * v0];
        for g in desc.gluings() {
            glued[g.i * v0 + g.a].push((g.j, g.b));
            glued[g.j * v0 + g.b].push((g.i, g.a));
        }
        // A slot glued to a prototype point is that prototype point too.
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n * v0 {
                let Some(c) = fixed_by[s] else { continue };
                for &(j, b) in &glued[s] {
                    match fixed_by[j * v0 + b] {
                        None => {
                            fixed_by[j * v0 + b] = Some(c);
                            changed = true;
                        }
                        Some(d) if d != c => {
                            return Err(Error::InconsistentGluing(format!(
                                "cell vertex ({}, {b}) is glued to both q_{c} and q_{d}",
                                j + 1
                            )));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(Builder {
            desc,
            keys: HashMap::new(),
            parent: Vec::new(),
            id: Vec::new(),
            witness: Vec::new(),
            fixed_by,
            glued,
        })
    }

    fn reduce(&self, mut word: Word, mut proto: usize) -> Slot {
        let n = self.desc.branches();
        let v0 = self.desc.v0size();
        while let Some(last) = word.last(n) {
            match self.fixed_by[last * v0 + proto] {
                Some(c) => {
                    proto = c as usize;
                    word = word.parent(n).expect("non-empty word");
                }
                None => break,
            }
        }
        Slot { word, proto: proto as u8 }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let (ia, ib) = (self.id[ra as usize], self.id[rb as usize]);
        if ia != NO_ID && ib != NO_ID {
            let (wa, pa) = self.witness[ia as usize];
            let (wb, pb) = self.witness[ib as usize];
            let n = self.desc.branches();
            return Err(Error::InconsistentGluing(format!(
                "points ({}, {pa}) and ({}, {pb}) received separate ids before being glued",
                wa.display(n),
                wb.display(n)
            )));
        }
        self.parent[ra as usize] = rb;
        if ib == NO_ID {
            self.id[rb as usize] = ia;
        }
        Ok(())
    }

    /// Index of the slot's key, closing its gluing orbit on first sight.
    fn intern(&mut self, slot: Slot) -> Result<u32> {
        if let Some(&k) = self.keys.get(&slot) {
            return Ok(k);
        }
        let first = self.insert(slot);
        let n = self.desc.branches();
        let v0 = self.desc.v0size();
        let mut pending: Vec<Slot> = vec![slot];
        while let Some(s) = pending.pop() {
            let Some(i) = s.word.last(n) else { continue };
            let stem = s.word.parent(n).expect("non-empty word");
            let me = self.keys[&s];
            for k in 0..self.glued[i * v0 + s.proto as usize].len() {
                let (j, b) = self.glued[i * v0 + s.proto as usize][k];
                let other = self.reduce(stem.child(j, n), b);
                let idx = match self.keys.get(&other) {
                    Some(&x) => x,
                    None => {
                        pending.push(other);
                        self.insert(other)
                    }
                };
                self.union(me, idx)?;
            }
        }
        Ok(first)
    }

    fn insert(&mut self, slot: Slot) -> u32 {
        let k = self.parent.len() as u32;
        self.keys.insert(slot, k);
        self.parent.push(k);
        self.id.push(NO_ID);
        k
    }
}

impl VertexHierarchy {
    pub fn build(desc: &FractalDescriptor, max_level: usize) -> Result<Self> {
        Self::build_with_budget(desc, max_level, Budget::default())
    }

    pub fn build_with_budget(
        desc: &FractalDescriptor,
        max_level: usize,
        budget: Budget,
    ) -> Result<Self> {
        let dims = Dimensions::of(desc);
        let v0 = desc.v0size();
        let mut b = Builder::new(desc)?;
        let mut levels: Vec<VertexTable> = Vec::with_capacity(max_level + 1);
        for m in 0..=max_level {
            let partition = Partition::build(desc, dims.d_h, m, budget.cells)?;
            let previous = levels.last().map_or(0, |t| t.count);
            let mut cell_vertices = Vec::with_capacity(partition.len() * v0);
            for &w in partition.words() {
                for a in 0..v0 {
                    let slot = b.reduce(w, a);
                    let key = b.intern(slot)?;
                    let root = b.find(key);
                    if b.id[root as usize] == NO_ID {
                        let next = b.witness.len();
                        if next >= budget.vertices {
                            return Err(Error::LevelTooLarge {
                                level: m,
                                needed: next + 1,
                                budget: budget.vertices,
                            });
                        }
                        b.id[root as usize] = next as u32;
                        b.witness.push((w, a));
                    }
                    cell_vertices.push(b.id[root as usize]);
                }
            }
            let parent = match levels.last() {
                Some(prev) => partition.parents_in(&prev.partition, desc.branches()),
                None => Vec::new(),
            };
            levels.push(VertexTable {
                partition,
                cell_vertices,
                count: b.witness.len(),
                previous,
                parent,
                v0size: v0,
            });
        }
        Ok(VertexHierarchy { desc: desc.clone(), dims, levels, witness: b.witness })
    }

    pub fn descriptor(&self) -> &FractalDescriptor {
        &self.desc
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, m: usize) -> &VertexTable {
        &self.levels[m]
    }

    pub fn levels(&self) -> &[VertexTable] {
        &self.levels
    }

    /// Birth slot `(word, prototype index)` of a vertex id.
    pub fn witness(&self, id: usize) -> (Word, usize) {
        self.witness[id]
    }

    /// Level at which a vertex first appears.
    pub fn birth_level(&self, id: usize) -> usize {
        self.levels.iter().position(|t| id < t.count).expect("id within hierarchy")
    }
}

/// Glue an arbitrary list of cells. Prototype points take ids `0..v0size`,
/// remaining points follow in order of first appearance.
pub fn glue_cells(desc: &FractalDescriptor, words: &[Word]) -> Result<(Vec<u32>, usize)> {
    let v0 = desc.v0size();
    let mut b = Builder::new(desc)?;
    let assign = |b: &mut Builder, w: Word, a: usize| -> Result<u32> {
        let slot = b.reduce(w, a);
        let key = b.intern(slot)?;
        let root = b.find(key);
        if b.id[root as usize] == NO_ID {
            b.id[root as usize] = b.witness.len() as u32;
            b.witness.push((w, a));
        }
        Ok(b.id[root as usize])
    };
    for a in 0..v0 {
        assign(&mut b, Word::EMPTY, a)?;
    }
    let mut out = Vec::with_capacity(words.len() * v0);
    for &w in words {
        for a in 0..v0 {
            out.push(assign(&mut b, w, a)?);
        }
    }
    Ok((out, b.witness.len()))
}

/// Convenience: the single level-`m` table.
pub fn build_vertex_table(desc: &FractalDescriptor, m: usize) -> Result<VertexTable> {
    let mut h = VertexHierarchy::build(desc, m)?;
    Ok(h.levels.pop().expect("at least level 0"))
}
