use thiserror::Error;

/// Errors raised by the model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates a documented precondition (dimensions, ranges, norms).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// The inputs fall outside the approximation regime a formula is valid in.
    #[error("regime error: {0}")]
    Regime(String),
    /// Branch states need both needle amplitudes to be nonzero.
    #[error("degenerate branch: needle amplitude {which} is zero")]
    DegenerateBranch { which: &'static str },
    /// The dense oracle refuses baths larger than its capacity.
    #[error("capacity error: {n} environment spins requested, at most {max} supported")]
    Capacity { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
