use thiserror::Error;

/// Errors raised anywhere in the mesh / discretization / solve pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("spaces are not nested: {0}")]
    NotNested(String),
    #[error("matrix is not symmetric positive definite (pivot {pivot} at column {column})")]
    NotSpd { column: usize, pivot: f64 },
    #[error(
        "conjugate gradient did not converge: residual {residual:e} after {iterations} iterations"
    )]
    CgDiverged { iterations: usize, residual: f64 },
    #[error("Uzawa iteration did not converge in {iterations} iterations (last increment {last_increment:e})")]
    UzawaNotConverged {
        iterations: usize,
        last_increment: f64,
        /// Increment history, one entry per iteration.
        history: Vec<f64>,
        /// Displacement coefficients of the last iterate (free DOFs).
        last_iterate: Vec<f64>,
    },
    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(
        "oracle did not reach stationarity within {iterations} iterations (residual {residual:e})"
    )]
    OracleNotConverged { iterations: usize, residual: f64 },
    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
