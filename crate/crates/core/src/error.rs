use thiserror::Error;

/// Errors raised by the estimators, checkers and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {0} outside the open unit interval")]
    InvalidProbability(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular point: quantile vanishes at u = {0}")]
    SingularPoint(f64),

    #[error("infinite tail exponent at x = {0} (no mass to the right)")]
    InfiniteTail(f64),

    #[error("cost {0} is not differentiable on the diagonal")]
    Nondifferentiable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no declared tail class for {0}")]
    UnknownTailClass(String),

    #[error("numerical nonconvergence in {what}: estimate {value:e}, error {error:e}; {reason}")]
    NonConvergence {
        what: String,
        value: f64,
        error: f64,
        reason: String,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("cannot parse {kind} descriptor `{input}`: {reason}")]
    Parse { kind: &'static str, input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(u))
    }
}
