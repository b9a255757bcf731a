//! Lumped Galerkin proxy for the Neumann Laplacian and its heat semigroup.

mod eigen;
pub mod equivalence;
mod heat;
pub mod heat_besov;
mod mass;
pub mod weyl;

pub use eigen::{
    bisect_count, count_below, neumann_eigs, neumann_eigs_from, spectral_upper_bound, SpectralData,
    DENSE_LIMIT,
};
pub use equivalence::{
    divergence_diagnostic, equivalence_experiment, tent_family, DivergenceReport, EquivalenceReport, FamilySpec,
    RatioReport,
};
pub use heat::{heat_apply, heat_derivative, vertex_lp};
pub use heat_besov::{grid_halving_change, heat_besov_norm, heat_grid, minimal_order, HeatConfig};
pub use mass::mass_matrix;
pub use weyl::{weyl_counts, weyl_slope, weyl_slope_with, WeylFit, WeylWindow};
