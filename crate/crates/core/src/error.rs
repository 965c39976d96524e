use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite: pivot {index} is {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("correlation is undefined for a zero-variance input")]
    ZeroVariance,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no proximal map is available for the k-support penalty; use the subgradient path")]
    UnsupportedProx,

    #[error("simplex exceeded its iteration cap of {cap}; basis = {basis:?}")]
    IterationLimit { cap: usize, basis: Vec<usize> },

    #[error("linear program is not optimal (status {0:?})")]
    NotOptimal(LpStatus),

    #[error("objective became non-finite at iteration {0}")]
    NonFinite(usize),

    #[error("invalid dataset: {0}")]
    Data(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("grouping audit needs a model trained with the elastic-net penalty")]
    WrongPenalty,

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the command-line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Argument,
    Data,
    Solver,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::UnsupportedProx => ErrorKind::Argument,
            Error::DimensionMismatch(_)
            | Error::ZeroVariance
            | Error::Data(_)
            | Error::Parse { .. }
            | Error::WrongPenalty
            | Error::NotPositiveDefinite { .. } => ErrorKind::Data,
            Error::IterationLimit { .. } | Error::NotOptimal(_) | Error::NonFinite(_) | Error::Internal(_) => {
                ErrorKind::Solver
            }
            Error::Io(_) => ErrorKind::Io,
        }
    }
}
