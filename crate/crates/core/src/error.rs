use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input or scenario violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical resolution guard rejected the request.
    #[error("guard violation: {0}")]
    Guard(String),

    #[error("degenerate critical point at ({x:.6}, {y:.6}): |det Hess(V/F)| = {det:.3e}")]
    DegenerateCriticalPoint { x: f64, y: f64, det: f64 },

    #[error("metric not positive definite at node ({i}, {j})")]
    MetricNotPositive { i: usize, j: usize },

    #[error("grid too coarse for the difference stencils: {nx}x{ny} (need at least 8 nodes per axis)")]
    GridTooCoarse { nx: usize, ny: usize },

    #[error("eigensolver did not converge (block {block})")]
    EigenConvergence { block: usize },

    #[error("{0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Config(_)
            | Error::DegenerateCriticalPoint { .. }
            | Error::MetricNotPositive { .. }
            | Error::GridTooCoarse { .. } => 2,
            Error::Guard(_) => 3,
            _ => 1,
        }
    }
}
