use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage that failed during estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Eigendecomposition,
    VertexHunting,
    SimplexInversion,
    Modularity,
    ModelSelection,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Eigendecomposition => "eigendecomposition",
            Stage::VertexHunting => "successive projection",
            Stage::SimplexInversion => "simplex inversion",
            Stage::Modularity => "modularity",
            Stage::ModelSelection => "model selection",
        };
        f.write_str(s)
    }
}

/// Ways a connectivity matrix can fail validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectivityError {
    #[error("connectivity matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("connectivity matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("connectivity matrix is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },
    #[error("connectivity matrix max |entry| is {max_abs}, expected 1")]
    MaxEntry { max_abs: f64 },
    #[error("{family} edges need a nonnegative connectivity matrix, found {value} at ({row}, {col})")]
    SignInadmissible { family: &'static str, row: usize, col: usize, value: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("invalid value: {0}")]
    Value(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),

    #[error("estimation failed at {stage}: {message}")]
    Estimation { stage: Stage, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn estimation(stage: Stage, message: impl Into<String>) -> Self {
        Error::Estimation { stage, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
