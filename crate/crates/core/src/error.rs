use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pitch {theta:.6} rad is within the gimbal guard margin (limit {limit:.6} rad)")]
    GimbalProximity { theta: f64, limit: f64 },

    #[error("mass matrix is ill-conditioned (condition number {cond:.3e})")]
    SingularMass { cond: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::SchemaMismatch(_) | Error::ShapeMismatch(_) | Error::LengthMismatch { .. } => 3,
            Error::Divergence(_) | Error::SingularMass { .. } | Error::GimbalProximity { .. } => 4,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
