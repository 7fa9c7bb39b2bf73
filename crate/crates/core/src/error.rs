use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no additive split of the form is available for meet-in-the-middle enumeration")]
    SplitUnavailable,

    #[error("resource limit exceeded: {what} needs {needed} units, budget is {budget}")]
    ResourceLimit {
        what: &'static str,
        needed: f64,
        budget: f64,
    },

    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("inconsistent h-invariant bounds: lower {lower} > upper {upper}")]
    InconsistentBounds { lower: usize, upper: usize },

    #[error("kernel sandwich violated at t = {t}: {detail}")]
    SandwichViolation { t: f64, detail: String },

    #[error("the zero set is empty in the requested box")]
    EmptyZeroSet,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn resource(what: &'static str, needed: f64, budget: f64) -> Self {
        Error::ResourceLimit {
            what,
            needed,
            budget,
        }
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
