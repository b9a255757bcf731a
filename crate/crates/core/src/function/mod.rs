//! Function representations: vertex samples, piecewise-harmonic cells, Haar
//! layers and tent series.

mod haar;
mod piecewise;
mod projection;
mod quadrature;
mod tent;

pub use haar::{conditional_expectation, HaarCoefficients};
pub use piecewise::{
    extend_cells, extend_level0, harmonic_extend, prolong, PiecewiseHarmonic, VertexFunction,
    CONTINUITY_TOLERANCE,
};
pub use projection::project_piecewise_harmonic;
pub use quadrature::{
    all_words, lp_norm, lp_norm_to_tolerance, LpEstimate, LpNormer, SamplingRule, DEFAULT_DEPTH,
};
pub use tent::{tent_interpolation, TentSeries};
