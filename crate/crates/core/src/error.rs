use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid mesh resolution: {0}")]
    InvalidResolution(String),

    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter { name: &'static str, constraint: String },

    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("solve did not reach tolerance: relative residual {residual:e} > {tol:e}")]
    ToleranceNotMet { residual: f64, tol: f64 },

    #[error("coordinate z = {z} outside the {side} layer")]
    OutOfRange { z: f64, side: &'static str },

    #[error("config parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config validation error: {field}: {constraint}")]
    Validation { field: String, constraint: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}
