//! Discrete function spaces on post-critically finite self-similar sets.
//!
//! Graph energies, harmonic structures, Lipschitz-Besov seminorms in their
//! direct, Haar, tent and graph-Laplacian forms, a heat-semigroup proxy, and
//! an estimator for the critical curve below which the heat and Lipschitz
//! Besov scales agree.
//!
//! ```
//! use pcf_besov::{pcf::presets, Fractal};
//!
//! let sg = Fractal::new(&presets::sierpinski_gasket(), 3).unwrap();
//! assert!((sg.dims().d_s - 1.36521).abs() < 1e-5);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod critical;
pub mod error;
pub mod function;
pub mod harmonic;
pub mod io;
pub mod laplacian;
pub mod linalg;
pub mod model;
mod par;
pub mod pcf;
pub mod report;
pub mod resistance;
pub mod spectral;

pub use error::{Error, Result};
pub use model::Fractal;
pub use report::{Method, SeminormReport};
