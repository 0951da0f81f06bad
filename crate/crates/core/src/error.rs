use thiserror::Error;

use crate::outliers::OutlierSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("LCD undefined: null-model loss is zero")]
    UndefinedLcd,

    #[error("intercept-only null sits on the boundary (mean response {mean}); use the uniform binary null")]
    BoundaryNull { mean: f64 },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("outlier detection did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize, last: Box<OutlierSolution> },

    #[error("every point is flagged at every penalty level; the data are corrupted or the model is unsuitable")]
    ModelUnsuitable,

    #[error("sampler tuning failed: acceptance rate {acceptance:.4} after adaptation")]
    TuningFailure { acceptance: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::ModelUnsuitable
                | Error::TuningFailure { .. }
                | Error::InsufficientSamples(_)
                | Error::UndefinedLcd
        )
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::Shape { expected: expected.to_string(), got: got.to_string() }
    }
}
