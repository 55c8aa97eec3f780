use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("design matrix columns are linearly dependent; normal equations are singular")]
    RankDeficient,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("polynomial basis needs at least one function (degree >= 1)")]
    DegreeZero,

    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("WINNOW requires non-negative features; found {value} at row {row}, column {column}")]
    NegativeFeature { row: usize, column: usize, value: f64 },

    #[error("targets must be 0 or 1; found {value} at row {row}")]
    InvalidLabel { row: usize, value: f64 },

    #[error("{name} = {value} is out of range: {bound}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error(
        "discrepancy target {target} is not enclosed by the bracket \
         (discrepancy {low} at gamma_lo, {high} at gamma_hi)"
    )]
    BracketInvalid { target: f64, low: f64, high: f64 },

    #[error("balancing iterate degenerated at gamma = {gamma:e}: {reason}")]
    DegenerateIterate { gamma: f64, reason: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("field grid is empty or not square")]
    EmptyGrid,

    #[error("unknown basis `{0}` (expected poly:<d>, linear:<n>, linear2d or quad2d)")]
    UnknownBasis(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, value: f64, bound: &'static str) -> Error {
    Error::OutOfRange { name, value, bound }
}
