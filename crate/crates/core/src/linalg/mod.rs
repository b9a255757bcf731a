//! Sparse kernels used by the level solvers.

mod csr;
mod ldl;
mod pcg;

pub use csr::CsrMatrix;
pub use ldl::Ldl;
pub use pcg::pcg;
