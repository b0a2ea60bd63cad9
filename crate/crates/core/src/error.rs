use thiserror::Error;

/// Errors surfaced by the library. Indices in messages are 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-binary entry {value} at position {index}")]
    NonBinary { index: usize, value: String },

    #[error("unknown model name `{0}`")]
    UnknownModel(String),

    #[error("model {0} is known to be invalid; pass allow-invalid to build it")]
    InvalidModelRequested(String),

    #[error("missing {kind} weight for pair ({i},{j})")]
    MissingWeight { kind: &'static str, i: usize, j: usize },

    #[error("{kind} weight for pair ({i},{j}) is {value}; weights must be strictly positive")]
    NonPositiveWeight {
        kind: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("instance is asymmetric; only the research mode accepts it")]
    AsymmetricInstance,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite coefficient in {0}")]
    NonFinite(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate row name `{0}`")]
    DuplicateRow(String),

    #[error("simplex stalled after {0} iterations")]
    SolverStall(usize),

    #[error("LP is not optimal ({0})")]
    NotOptimal(String),

    #[error("model was built for instance {model} but instance {instance} was supplied")]
    FingerprintMismatch { model: String, instance: String },

    #[error("instance size {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("no instance accepted after {0} attempts")]
    AttemptsExhausted(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
