use std::path::PathBuf;

use thiserror::Error;

use crate::estimation::EstimationError;
use crate::graph::GraphError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error for I/O-facing and orchestration code.
///
/// Domain modules have their own narrower errors ([`GraphError`],
/// [`EstimationError`]) that convert into this one.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error(transparent)]
    Estimation(#[from] EstimationError),

    #[error("invalid data frame: {0}")]
    Frame(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown workflow family `{0}`")]
    UnknownFamily(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("certificate check failed on field `{field}`: {detail}")]
    CertificateMismatch { field: String, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
