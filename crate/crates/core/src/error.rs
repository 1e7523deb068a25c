use thiserror::Error;

use crate::tensorframes::Frame;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: String, found: Frame },

    #[error("strain component {component} = {value:e} exceeds the small-strain bound {bound:e}")]
    StrainOutOfRange {
        component: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (max deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("underdetermined fit: {rows} rows, at least {needed} required")]
    Underdetermined { rows: usize, needed: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("least squares did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("degenerate states: {0}")]
    Degenerate(String),

    #[error("stage {stage} ({name}) failed: {source}")]
    Stage {
        stage: u8,
        name: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: {reason}")]
    Schema { row: u64, reason: String },

    #[error("control values must be strictly increasing (row {row}: {value} after {previous})")]
    NonMonotonic { row: usize, value: f64, previous: f64 },

    #[error("control value {value} outside trajectory range [{low}, {high}]")]
    OutOfRange { value: f64, low: f64, high: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_stage(self, stage: u8, name: &'static str) -> Self {
        Error::Stage {
            stage,
            name,
            source: Box::new(self),
        }
    }
}
