use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is structurally valid but carries no usable signal (e.g. an all-zero tensor).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The GP covariance could not be factorized even after escalating the jitter.
    #[error("covariance factorization failed after jitter escalation up to {max_jitter:e}")]
    Conditioning { max_jitter: f64 },

    /// A grid evaluation would exceed the configured cap.
    #[error("grid of {requested} points exceeds the evaluation cap of {cap}")]
    Budget { requested: u64, cap: u64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Trace(#[from] TraceError),

    #[error(transparent)]
    Csv(#[from] CsvError),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Errors from the flat `key = value` documents (experiment configs and scenes).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },

    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { key: String, line: usize },

    #[error("unknown key `{key}`")]
    UnknownKey { key: String },

    #[error("key `{key}`: expected {expected}, found `{found}`")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        found: String,
    },

    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("missing required key `{key}`")]
    Missing { key: String },
}

impl ConfigError {
    /// The key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::DuplicateKey { key, .. }
            | ConfigError::UnknownKey { key }
            | ConfigError::TypeMismatch { key, .. }
            | ConfigError::Invalid { key, .. }
            | ConfigError::Missing { key } => Some(key),
        }
    }
}

/// Errors raised while reading CSI trace files. Every variant carries the
/// 1-based line number it was detected on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("line {line}: orientation already appeared in an earlier group")]
    DuplicateOrientation { line: usize },

    #[error("line {line}: shape inconsistency: {reason}")]
    ShapeMismatch { line: usize, reason: String },

    #[error("line {line}: trace contains no orientations")]
    Empty { line: usize },
}

impl TraceError {
    pub fn line(&self) -> usize {
        match self {
            TraceError::MalformedHeader { line, .. }
            | TraceError::MalformedRow { line, .. }
            | TraceError::DuplicateOrientation { line }
            | TraceError::ShapeMismatch { line, .. }
            | TraceError::Empty { line } => *line,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsvError {
    #[error("line {line}: unexpected header `{found}`")]
    BadHeader { line: usize, found: String },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("line {line}: row out of sequence: {reason}")]
    OutOfSequence { line: usize, reason: String },
}

impl CsvError {
    pub fn line(&self) -> usize {
        match self {
            CsvError::BadHeader { line, .. }
            | CsvError::MalformedRow { line, .. }
            | CsvError::OutOfSequence { line, .. } => *line,
        }
    }
}
