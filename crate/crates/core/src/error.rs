use std::path::PathBuf;

/// Errors produced by loading, parsing, decomposition and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content in a text file, located by 1-based line number.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Malformed content in a binary file, located by byte offset.
    #[error("{path}: byte offset {offset}: {msg}")]
    ParseAt {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error("empty embedding set")]
    EmptyEmbedding,

    #[error("duplicate word in vocabulary: {0:?}")]
    DuplicateWord(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row index {index} out of range for {len} rows")]
    RowOutOfRange { index: usize, len: usize },

    #[error("matrix is not symmetric (max asymmetry {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("eigendecomposition did not converge (off-diagonal residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("fewer than 2 covered pairs ({covered})")]
    TooFewPairs { covered: usize },

    #[error("invalid alpha grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of an evaluation itself (degenerate statistics,
    /// non-convergence) as opposed to bad input files or usage.
    pub fn is_evaluation_error(&self) -> bool {
        matches!(
            self,
            Error::UndefinedCorrelation(_)
                | Error::TooFewPairs { .. }
                | Error::NoConvergence { .. }
                | Error::NotSymmetric { .. }
                | Error::DimensionMismatch { .. }
                | Error::RowOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
