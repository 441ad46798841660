use thiserror::Error;

/// Errors raised by the tomography pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomoError {
    #[error("physicality violated: sigma_qq*sigma_pp - sigma_qp^2 = {determinant} < 1/4")]
    Unphysical { determinant: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed grid: {0}")]
    MalformedGrid(String),

    #[error("row at theta = {theta} is not normalized (defect {defect:e})")]
    NonNormalized { theta: f64, defect: f64 },

    #[error("negative density {value} at theta = {theta}, x = {x}")]
    NegativeDensity { theta: f64, x: f64, value: f64 },

    #[error("angle {theta} is not covered by the data")]
    AngleNotCovered { theta: f64 },

    #[error("insufficient samples at theta = {theta}: {count} < {required}")]
    InsufficientSamples {
        theta: f64,
        count: usize,
        required: usize,
    },

    #[error("insufficient angles: {found} distinct angles in [0, pi), need at least {required}")]
    InsufficientAngles { found: usize, required: usize },

    #[error("Wigner grid does not cover the support: boundary value {boundary:e} exceeds tolerance {tolerance:e}")]
    SupportTruncated { boundary: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TomoError {
    fn from(err: std::io::Error) -> Self {
        TomoError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for TomoError {
    fn from(err: serde_json::Error) -> Self {
        TomoError::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TomoError>;
