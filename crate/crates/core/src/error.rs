use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),

    #[error("truncated SVD did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("scale statistic of the scores is zero")]
    ZeroSpread,

    #[error("no feature reaches threshold {threshold}")]
    EmptySelection { threshold: f64 },

    #[error("no index satisfies the Higher-Criticism eligibility constraints")]
    NoEligibleIndex,

    #[error("K = {k} exceeds the number of points ({n})")]
    InvalidK { k: usize, n: usize },

    #[error("K = {0} is too large for exact permutation matching (max 10)")]
    KTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Process exit codes of the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Usage = 2,
    Data = 3,
    Numerical = 4,
    EmptySelection = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<&Error> for ExitStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::UnknownExperiment(_) | Error::InvalidK { .. } | Error::KTooLarge(_) => {
                ExitStatus::Usage
            }
            Error::InvalidInput(_)
            | Error::ZeroVarianceColumn(_)
            | Error::Parse { .. }
            | Error::Json(_)
            | Error::Io(_) => ExitStatus::Data,
            Error::NoConvergence(_) | Error::ZeroSpread => ExitStatus::Numerical,
            Error::EmptySelection { .. } | Error::NoEligibleIndex => ExitStatus::EmptySelection,
        }
    }
}
