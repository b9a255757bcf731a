use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor schema error: {0}")]
    Schema(String),
    #[error("invalid boundary Laplacian: {0}")]
    InvalidLaplacian(String),
    #[error("gluing relations do not connect the level-1 cells")]
    DisconnectedGluing,
    #[error("inconsistent vertex identification: {0}")]
    InconsistentGluing(String),
    #[error("level {level} needs {needed} cells, budget is {budget}")]
    LevelTooLarge { level: usize, needed: usize, budget: usize },
    #[error("(H, r) is not a harmonic structure: trace residual {residual:.3e}")]
    HarmonicStructureViolation { residual: f64 },
    #[error("interior block of the level-1 energy is singular")]
    SingularInterior,
    #[error("integration-weight fixed point did not converge (residual {0:.3e})")]
    FixedPointDivergence(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("eigensolver failed: {0}")]
    EigSolverFailure(String),
    #[error("harmonic space is one-dimensional (only constants)")]
    DegenerateHarmonicSpace,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
