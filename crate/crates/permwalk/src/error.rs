//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested exact computation is only supported up to a size limit.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// A structural invariant that should hold by construction was violated;
    /// this signals an implementation bug, not bad input.
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    /// An iterative solver ran out of budget before reaching its residual target.
    #[error("solver did not converge: residual {residual:.3e} after {row_updates} row updates (target {target:.1e})")]
    Convergence {
        residual: f64,
        row_updates: u64,
        target: f64,
    },

    /// A proven bound was violated by an exact computation. The message
    /// carries the offending permutation serialized as JSON.
    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
