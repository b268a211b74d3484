use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("conductivity {value} at vertex {vertex} is below the admissible floor {floor}")]
    Inadmissible { vertex: usize, value: f64, floor: f64 },

    #[error("length mismatch: expected {expected} coefficients, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("linear solve did not reach tolerance (relative residual {residual:.3e})")]
    SolverNotConverged { residual: f64 },

    #[error("measurement {index}: {source}")]
    Measurement {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("transfer matrix column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("search direction vanished (stationary point)")]
    ZeroGradient,

    #[error("svd failed to converge")]
    Svd,

    #[error("config: {0}")]
    Config(String),

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Mesh(_) => "mesh",
            Error::Inadmissible { .. } => "admissibility",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Factorization(_) => "factorization",
            Error::SolverNotConverged { .. } => "solver",
            Error::Measurement { source, .. } | Error::Column { source, .. } => source.kind(),
            Error::ZeroGradient => "zero_gradient",
            Error::Svd => "svd",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}
