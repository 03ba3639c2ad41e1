use alloc::string::String;

/// Failures shared by every layer of the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{what} at level {level} exceeds the cutoff {cutoff}")]
    Truncated {
        what: &'static str,
        level: i64,
        cutoff: i64,
    },
    #[error("unknown basis vector: {0}")]
    UnknownBasis(String),
    #[error("declared depth {declared} but L0 has nilpotency depth {actual}")]
    DepthMismatch { declared: usize, actual: usize },
    #[error("window dimension {needed} exceeds the budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("window {available} is too small, {required} is needed")]
    WindowTooSmall { required: usize, available: usize },
    #[error("modules are defined over different vertex algebras")]
    VoaMismatch,
    #[error("invalid data: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn truncated(what: &'static str, level: i64, cutoff: usize) -> Error {
    Error::Truncated {
        what,
        level,
        cutoff: cutoff as i64,
    }
}
