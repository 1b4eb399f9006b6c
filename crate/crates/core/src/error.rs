use thiserror::Error;

/// Errors produced by the solvers and checkers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The implicit step weight `1 + mu * w_00` vanished; the requested
    /// coefficient lies outside the region where the stepping is well posed.
    #[error("step singularity at step {step}: |1 + mu * w_00| = {magnitude:.3e}")]
    StepSingularity { step: usize, magnitude: f64 },

    #[error("singular step matrix at step {step}")]
    SingularStepMatrix { step: usize },

    #[error("eigenbasis condition number {cond:.3e} exceeds the cap {cap:.1e}")]
    IllConditionedEigenbasis { cond: f64, cap: f64 },

    #[error("eigendecomposition residual {residual:.3e} exceeds {tol:.3e}; matrix is defective or near-defective")]
    DefectiveMatrix { residual: f64, tol: f64 },

    #[error("no admissible angle: interval ({lo:.6}, {hi:.6}) is empty")]
    NoAngleBudget { lo: f64, hi: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("problem size {size} exceeds the dense-solve cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
