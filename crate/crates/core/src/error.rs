use thiserror::Error;

use crate::params::ConfigError;

/// Errors raised by the numeric engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration would visit more subsets than allowed.
    #[error("enumeration budget exceeded: {required} subsets required, limit is {limit}")]
    BudgetExceeded { required: String, limit: u64 },

    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
