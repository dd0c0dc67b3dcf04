use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency entry {value} outside the band of width {bandwidth}")]
    FrequencyOutOfRange { value: i64, bandwidth: u64 },

    #[error("duplicate frequency vector {0:?}")]
    DuplicateFrequency(Vec<i64>),

    #[error("non-finite coefficient for frequency {0:?}")]
    NonFiniteCoefficient(Vec<i64>),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("unwrapped frequency {0} is not in the image of the unwrapping map")]
    NotInImage(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero denominator in phase ratio")]
    ZeroDenominator,

    #[error("oracle size guard: {0} grid points exceeds the limit")]
    OracleTooLarge(u128),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
