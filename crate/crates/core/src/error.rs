use thiserror::Error;

use crate::ideal::IdealHnf;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field parameter D = {0}: must be squarefree and > 1")]
    InvalidDiscriminant(i64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero ideal is not allowed here")]
    ZeroIdeal,
    #[error("field of size {size} cannot host characters of exponent {exponent}; need degree m = {needed}")]
    CharacterFieldTooSmall { size: u64, exponent: u64, needed: u32 },
    #[error("characteristic {p} divides the class group exponent {exponent}")]
    CharacteristicDividesExponent { p: u64, exponent: u64 },
    #[error("class group did not close: {0}")]
    ClassGroupNotClosed(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("coefficient at {ideal:?} (norm {norm}) is beyond precision {precision}")]
    BeyondPrecision { ideal: IdealHnf, norm: u64, precision: u64 },
    #[error("incompatible operands: {0}")]
    Mismatch(String),
    #[error("invariant falsified: {0}")]
    Falsified(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{stage}: {inner}")]
    Stage { stage: String, inner: Box<Error> },
}

impl Error {
    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage { stage: stage.to_string(), inner: Box::new(self) }
    }

    /// The innermost error, with stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { inner, .. } => inner.root(),
            e => e,
        }
    }

    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn is_precision(&self) -> bool {
        matches!(self.root(), Error::Precision(_) | Error::BeyondPrecision { .. })
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self.root(), Error::Falsified(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
