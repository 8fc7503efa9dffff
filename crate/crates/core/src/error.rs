use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Coordinates left the open chamber (coincident or non-positive entries).
    #[error("chamber violation: {0}")]
    Chamber(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("eigen residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("spectrum is not real: max |Im| = {0:e}")]
    SpectrumNotReal(f64),

    #[error("spectrum is not symmetric: pairing residual {0:e}")]
    SpectrumAsymmetric(f64),

    #[error("matrix is not positive definite: smallest eigenvalue {0:e}")]
    NotPositiveDefinite(f64),

    #[error("leading minor of order {0} is singular")]
    SingularMinor(usize),

    #[error("Newton polish failed after {iters} iterations (residual {residual:e})")]
    NewtonFailed { iters: usize, residual: f64 },

    #[error("asymptotic seed error {0:e} exceeds 0.5")]
    SeedError(f64),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("insufficient samples: need {need}, have {have}")]
    InsufficientSamples { need: usize, have: usize },

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
