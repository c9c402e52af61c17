use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A structural argument (size, index, empty input) was rejected.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numeric argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation requires a proper prior (or a Jeffreys prior with n >= 2).
    #[error("unsupported prior: {0}")]
    UnsupportedPrior(String),

    /// Elicitation targets cannot be met by the requested family.
    #[error("infeasible targets: violated constraint: {0}")]
    InfeasibleTargets(String),

    /// An iterative solver exhausted its budget. Carries the last iterate.
    #[error("solver did not converge: {context} (last iterate {last:?})")]
    NoConvergence { context: String, last: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
