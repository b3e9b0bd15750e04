use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin number must be even, got {0}")]
    OddSpinNumber(usize),

    #[error("spin number must be at least {min}, got {n}")]
    TooFewSpins { n: usize, min: usize },

    #[error("m_z = {m_z} out of range for N = {n} (|m_z| <= N/2)")]
    MzOutOfRange { n: usize, m_z: i64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state norm {0} is not 1")]
    NotNormalized(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("accumulator {a} out of range for {k} bits")]
    AccumulatorOutOfRange { a: u64, k: u32 },

    #[error("both measurement outcomes have zero probability in round {round}")]
    InconsistentRecord { round: u32 },

    #[error("vanishing derivative: sensitivity diverges")]
    DivergentSensitivity,

    #[error("outside the valid regime: {0}")]
    OutOfRegime(String),

    #[error("spin number {n} exceeds the full-state limit {max}")]
    TooLargeForOracle { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
