use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong dimension,
    /// exterior point, inadmissible index, out-of-range parameter).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The base coordinate vanished where the fibering map is singular.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// A kernel denominator is exactly zero.
    #[error("pole: {0}")]
    Pole(String),

    #[error("series did not converge after {frontiers} frontier expansions")]
    ConvergenceFailure { frontiers: usize },

    /// A deterministic rule met a non-finite integrand value.
    #[error("non-finite integrand value at node {index}")]
    NonFinite { index: usize },

    /// Monte Carlo exceeded its budget of excluded non-finite draws.
    #[error("{excluded} of {count} samples were non-finite (budget {budget})")]
    ExcessNonFinite {
        excluded: usize,
        count: usize,
        budget: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_contract(&self) -> bool {
        matches!(
            self,
            Error::ContractViolation(_) | Error::SingularPoint(_) | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
