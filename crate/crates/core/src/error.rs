use thiserror::Error;

/// Errors produced anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree must be at least 1, got {0}")]
    ZeroDegree(usize),

    #[error("quadrature rule needs at least one point")]
    EmptyRule,

    #[error("basis index {index} out of range {min}..={max}")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell count overflow: {0}")]
    Overflow(String),

    #[error("operation `{op}` is not defined for a {dim}D complex")]
    WrongDimension { op: &'static str, dim: usize },

    #[error("cochain length {got} does not match the {expected} cells of the complex")]
    CochainLength { expected: usize, got: usize },

    #[error("field kind mismatch: {0}")]
    KindMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: [f64; 3] },

    #[error("inconsistent boundary data: net boundary flux {imbalance:e} (must vanish)")]
    InconsistentBoundary { imbalance: f64 },

    #[error("singular saddle-point system: zero pivot at unknown {index}")]
    Singular { index: usize },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
