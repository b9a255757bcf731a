//! Lipschitz-Besov seminorms and the `(1/p, σ)` parameter plane.

pub mod ip;
pub mod norms;
pub mod regions;

pub use ip::{ip_functional, strictly_within, working_values, IpEngine, IpMode, IpValue, STRICT_TOLERANCE};
pub use norms::{
    lambda_norm, lambda_norm_direct, lambda_norm_direct_batch, lambda_norm_direct_with, lambda_norm_graph,
    lambda_norm_haar, lambda_norm_tent, NormConfig,
};
pub use regions::{critical_bounds, l1, l2, region_classify, region_curves, CurveRow, Region, RegionPoint};
