//! Error type shared by every module, with a stable mapping onto process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no built-in fiducial for dimension {0}; use search_fiducial instead")]
    NoBuiltinFiducial(usize),

    #[error("fiducial search failed after {iterations} iterations (best frame potential {best_potential:.6e})")]
    SearchFailed { iterations: usize, best_potential: f64 },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node sets overlap: {0}")]
    Overlap(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("outcome space too large: {0}")]
    Overflow(String),

    #[error("graph has {nodes} nodes; limit for this operation is {limit}")]
    TooManyNodes { nodes: usize, limit: usize },

    #[error("time reversal undefined after surgery")]
    ReversalAfterSurgery,

    #[error("graph is not a QDAG")]
    NotQdag,

    #[error("unsupported graph shape for intervention formula: {0}")]
    UnsupportedShape(String),

    #[error("formula undefined at this value: {0}")]
    UndefinedAtValue(String),

    #[error("input statistics not realizable by a quantum model: {0}")]
    NotQuantum(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code contract: 2 input, 3 resource, 4 undefined query, 5 unsupported shape.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Overflow(_) | Error::TooManyNodes { .. } => 3,
            Error::UndefinedAtValue(_) => 4,
            Error::UnsupportedShape(_) | Error::NotQdag | Error::ReversalAfterSurgery => 5,
            Error::Internal(_) => 70,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
