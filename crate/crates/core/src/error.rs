use thiserror::Error;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the domain where a formula or model is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A root finder, quadrature or transform inversion missed its accuracy target.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    /// Malformed configuration; `key` names the offending entry.
    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_convergence(msg: impl Into<String>) -> Self {
        Error::NonConvergence(msg.into())
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
