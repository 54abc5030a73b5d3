use thiserror::Error;

/// Errors raised by the decomposition kernels, projections and drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input carries no direction information (e.g. a zero matrix handed
    /// to the unitarization operator).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    /// Some pair of eigenvalues of the Sylvester coefficients cancels.
    #[error("singular Sylvester pencil (min alpha_i + beta_j = {min_sum:e})")]
    SingularPencil { min_sum: f64 },

    /// Neither quasiprojection option restores the product constraint.
    #[error("both quasiprojection options are rank deficient")]
    DegeneratePair,

    #[error("projection failed at iteration {iteration}: {reason}")]
    ProjectionFailed { iteration: usize, reason: String },

    #[error("summand {index} is not rank one (residual {residual:e})")]
    NotRankOne { index: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
