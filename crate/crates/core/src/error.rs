use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Coefficient lookup at or beyond the precision bound of a series.
    #[error("coefficient q^{wanted} requested, but series is only known below q^{precision}")]
    PrecisionExceeded { wanted: i64, precision: i64 },

    /// An operation would produce a series with an empty coefficient window.
    #[error("precision underflow: window [{valuation}, {precision}) is empty")]
    PrecisionUnderflow { valuation: i64, precision: i64 },

    /// Inversion of a series with no nonzero coefficient.
    #[error("cannot invert the zero series")]
    InvertZero,

    /// An operator needs more input coefficients than are available.
    #[error("insufficient precision: need coefficients below q^{needed}, have q^{available}")]
    InsufficientPrecision { needed: i64, available: i64 },

    #[error("invalid weight {0}")]
    BadWeight(i64),

    #[error("invalid discriminant argument {0}")]
    BadDiscriminant(i64),

    #[error("form [{a},{b},{c}] is not positive definite")]
    NotPositiveDefinite { a: i64, b: i64, c: i64 },

    #[error("cusp space of weight {weight} has dimension {dim}, expected {expected}")]
    WrongDimension {
        weight: i64,
        dim: usize,
        expected: usize,
    },

    /// CM-point trace failed to round to an integer after precision escalation.
    #[error("trace t_{m}({d}) failed integrality rounding: err {err} after escalation")]
    RoundingAmbiguity { m: u32, d: i64, err: f64 },

    /// A numeric series failed its convergence / stability check.
    #[error("numeric instability: {0}")]
    NumericInstability(String),

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
