//! Error type shared by every module of the laboratory.

use thiserror::Error;

/// Errors surfaced by grid construction, operator assembly, and solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input field or pair of fields violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Operator spec is internally inconsistent (kind vs. topology, etc.).
    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),

    /// A nonlinearity was evaluated outside its domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Riesz potential requested in the subcritical range N <= 2s.
    #[error("subcritical: Riesz potential requires N > 2s, got N={n}, s={s}")]
    Subcritical { n: usize, s: f64 },

    /// Operation restricted to one dimension was called on a higher-dimensional grid.
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// Green-identity verification called outside its two supported regimes.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// An implicit step did not converge; carries the solve report.
    #[error("step failure at t={t}: residual {residual:.3e} after {iterations} iterations")]
    StepFailure {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    /// A sweep or comparison could not be completed.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
