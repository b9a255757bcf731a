//! Combinatorial encoding of p.c.f. self-similar sets.

mod descriptor;
mod dims;
mod vertex;
mod word;

pub use descriptor::{presets, DescriptorDocument, FixedPoint, FractalDescriptor, Gluing};
pub use dims::{solve_hausdorff_dimension, Dimensions};
pub use vertex::{build_vertex_table, glue_cells, Budget, Incidence, VertexHierarchy, VertexTable};
pub use word::{branch_measures, cmp_lex, Partition, Word, DEFAULT_CELL_BUDGET};

/// `μ_w = Π r_{w_i}^{d_H}`.
pub fn cell_measure(desc: &FractalDescriptor, w: &Word) -> f64 {
    let mu = branch_measures(desc, Dimensions::of(desc).d_h);
    w.letters(desc.branches()).iter().fold(1.0, |acc, &l| acc * mu[l])
}

/// Shorthand for [`Partition::build`] with the descriptor's own dimension.
pub fn build_partition(desc: &FractalDescriptor, m: usize, budget: usize) -> crate::Result<Partition> {
    Partition::build(desc, Dimensions::of(desc).d_h, m, budget)
}
