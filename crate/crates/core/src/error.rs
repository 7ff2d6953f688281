use thiserror::Error;

/// Errors raised by sequence handling, feasibility and the constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (bad rational, entry outside [0,1], ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The request is well-formed but needs structure the finite encoding cannot express.
    #[error("unsupported structure: {0}")]
    Unsupported(String),

    /// An index query ran past the available entries of a class.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A construction hypothesis failed.
    #[error("hypothesis violated at n={n}: {reason}")]
    Hypothesis { n: usize, reason: String },

    /// A scalar routine was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cell sets handed to the gluing step overlap or leave gaps.
    #[error("partition error: {0}")]
    Partition(String),

    /// The prescribed diagonal fails the a/b condition, so no projection exists.
    #[error("infeasible diagonal{}: a = {a}, b = {b}; a - b is not an integer", cell.as_ref().map(|c| format!(" in cell {c}")).unwrap_or_default())]
    Infeasible {
        cell: Option<String>,
        a: String,
        b: String,
    },

    /// A construction invariant that should always hold did not; this is a bug trap.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    pub(crate) fn hypothesis(n: usize, reason: impl Into<String>) -> Self {
        Error::Hypothesis {
            n,
            reason: reason.into(),
        }
    }
}
