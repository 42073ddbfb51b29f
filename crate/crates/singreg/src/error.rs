//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide error taxonomy.
///
/// The CLI maps these onto its exit-code contract: configuration and lookup
/// problems exit 2, numerical failures exit 3, I/O failures exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain where the construction is defined
    /// (non-positive scale, n ≤ 2, x ≤ 0, evaluation off a table, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The construction collapses identically for these inputs rather than
    /// failing to converge; n = 4 (where the leading approximant constant
    /// vanishes) is the canonical case.
    #[error("degenerate construction: {0}")]
    Degenerate(String),

    /// An iterative numeric procedure failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Config/registry content is malformed or refers to unknown entries.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
