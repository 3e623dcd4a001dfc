use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("entry count {found} does not fill a {dim}x{dim} matrix")]
    Shape { dim: usize, found: usize },
    #[error("state is not normalized (squared norm {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max deviation {deviation})")]
    NotUnitary { deviation: f64 },
    #[error("observable spectrum is not {{+1, -1}}")]
    SpectrumNotBinary,
    #[error("measurement family is incomplete (max deviation from identity {deviation})")]
    Incomplete { deviation: f64 },
    #[error("measurement family has duplicate outcome value {0}")]
    DuplicateOutcome(f64),
    #[error("measurement family is empty")]
    EmptyFamily,
    #[error("measurement family is not projective")]
    NonProjective,
    #[error("measurement family outcomes are not {{+1, -1}}")]
    NotBinaryFamily,
    #[error("outcome {0} has zero probability")]
    ZeroProbability(f64),
    #[error("outcome value {0} is not in the family")]
    UnknownOutcome(f64),
    #[error("variance {0} is negative beyond rounding")]
    NegativeVariance(f64),
    #[error("count table has zero total")]
    ZeroTotal,
    #[error("count table has a negative or non-finite cell")]
    InvalidCounts,
    #[error("{quantity}^2 = {raw} is implausibly negative ({sigmas:.1} standard deviations below zero)")]
    DataCorruption {
        quantity: &'static str,
        raw: f64,
        sigmas: f64,
    },
    #[error("bootstrap needs raw integer counts")]
    NonIntegerCounts,
    #[error("contrast {0} outside (0, 1]")]
    InvalidContrast(f64),
    #[error("counts per state must be at least 1")]
    ZeroCounts,
    #[error("invalid phi grid: {0}")]
    InvalidGrid(String),
    #[error("draw count must be at least 1")]
    ZeroDraws,
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
