use alloc::string::String;
use core::fmt;

use crate::loss::LossSpec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a support (or a dictionary size) do not.
    Alignment { expected: usize, found: usize },
    NotDifferentiable { loss: LossSpec, x: f64 },
    InvalidLoss(String),
    InvalidDistribution(String),
    InvalidClassifier(String),
    InvalidDataset(String),
    InvalidWeights(String),
    /// Parameters fall outside the range where a construction or a rule is defined.
    InvalidRegime(String),
    SupportTooLarge { atoms: usize, limit: usize },
    PenaltyOutOfRange { index: usize, value: f64, bound: f64 },
    EmptyGroup,
    NonPositiveMean { index: usize, value: f64 },
    TooFewPoints { needed: usize, found: usize },
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Alignment { expected, found } => {
                write!(f, "alignment error: expected length {expected}, found {found}")
            }
            Error::NotDifferentiable { loss, x } => {
                write!(f, "loss {loss} is not twice differentiable at x = {x}")
            }
            Error::InvalidLoss(msg) => write!(f, "invalid loss: {msg}"),
            Error::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            Error::InvalidClassifier(msg) => write!(f, "invalid classifier: {msg}"),
            Error::InvalidDataset(msg) => write!(f, "invalid dataset: {msg}"),
            Error::InvalidWeights(msg) => write!(f, "invalid weight vector: {msg}"),
            Error::InvalidRegime(msg) => write!(f, "invalid regime: {msg}"),
            Error::SupportTooLarge { atoms, limit } => {
                write!(f, "support too large: {atoms} atoms (limit {limit})")
            }
            Error::PenaltyOutOfRange { index, value, bound } => write!(
                f,
                "penalty {value} for member {index} exceeds the declared bound {bound}"
            ),
            Error::EmptyGroup => f.write_str("empty group"),
            Error::NonPositiveMean { index, value } => {
                write!(f, "mean {value} at point {index} is not positive; log undefined")
            }
            Error::TooFewPoints { needed, found } => {
                write!(f, "need at least {needed} points, found {found}")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
