use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("index {index} out of range for length {length}")]
    IndexOutOfRange { index: usize, length: usize },

    #[error("bit strings longer than {max} are unsupported (requested {requested})")]
    TooLong { requested: usize, max: usize },

    #[error("no balanced strings of odd length {0}")]
    OddLength(usize),

    #[error("invalid dimension {0}: d must be even and at least 2")]
    InvalidDimension(usize),

    #[error("empty sample has no empirical risk")]
    EmptySample,

    #[error("unrealizable sample: {0}")]
    UnrealizableSample(String),

    #[error("regularizer table is not locally injective")]
    NotLocallyInjective,

    #[error("regularizer table has {got} ranks, expected {expected}")]
    IncompleteTable { got: usize, expected: usize },

    #[error("point {point} outside regularizer domain 0..{bound}")]
    PointOutOfRange { point: u64, bound: usize },

    #[error("hypothesis {0} not present in the regularizer's class")]
    HypothesisNotInClass(String),

    #[error("unknown regularizer family {0:?}")]
    UnknownFamily(String),

    #[error("duplicate points in sequence")]
    DuplicatePoints,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shares are inconsistent with a single polynomial of the declared degree")]
    InconsistentShares,

    #[error("malformed regularizer file: {0}")]
    Format(String),

    #[error("cannot parse bit string {0:?}")]
    ParseBitString(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
