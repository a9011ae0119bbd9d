use thiserror::Error;

/// Errors raised by model construction, sampling, solving and decoding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("level count must be even and at least 2, got {0}")]
    LevelCount(usize),

    #[error("ring radii must be strictly increasing (ring {index} has radius {radius} after {previous})")]
    RingOrder {
        index: usize,
        radius: f64,
        previous: f64,
    },

    #[error("carrier {carrier_hz} Hz aliases at sample rate {sample_rate_hz} Hz (needs f_c < f_s/2)")]
    Aliasing {
        carrier_hz: f64,
        sample_rate_hz: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("operator has zero norm")]
    ZeroOperator,

    #[error("rotation is undefined: decided and transmitted symbols are uncorrelated")]
    UndefinedRotation,

    #[error("`{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("{0}")]
    Parse(String),

    #[error("exhaustive search over {0} assignments exceeds the budget of 1e6")]
    CombinatorialBudget(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            actual,
        })
    }
}
