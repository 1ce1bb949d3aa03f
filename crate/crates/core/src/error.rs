use thiserror::Error;

/// Errors shared across the crate.
///
/// Non-convergence of iterative routines is *not* an error: solvers and the
/// Lewis-weight iteration return their best iterate with `converged = false`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty coreset: no rows were kept")]
    EmptyCoreset,

    #[error("parse error in {path} at {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn invalid(msg: impl ToString) -> Self {
        Error::InvalidArgument(msg.to_string())
    }

    pub(crate) fn domain(msg: impl ToString) -> Self {
        Error::Domain(msg.to_string())
    }
}
