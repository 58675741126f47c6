use thiserror::Error;

/// Errors raised by the filters, the channel generator and the harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A normalized update was asked to divide by a zero-energy regressor.
    /// Callers are expected to skip the sample.
    #[error("regressor has zero energy; normalized update undefined")]
    DegenerateRegressor,

    #[error("estimate became non-finite at iteration {iteration}")]
    Diverged { iteration: u64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
