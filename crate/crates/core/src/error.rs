use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Problems with a single probability row or matrix.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("empty row")]
    EmptyRow,
    #[error("matrix has no rows")]
    NoRows,
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: probability {value} outside [0,1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, more than {tolerance} away from 1")]
    RowSum { row: usize, sum: f64, tolerance: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}, sentence '{id}': {message}")]
    InvalidRecord {
        line: usize,
        id: String,
        message: String,
    },

    #[error("line {line}: duplicate sentence id '{id}'")]
    DuplicateId { line: usize, id: String },

    #[error("sentence '{id}': {source}")]
    Matrix { id: String, source: MatrixError },

    #[error(transparent)]
    Row(#[from] MatrixError),

    #[error("sentence '{id}': matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        id: String,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("run {run}: {message}")]
    RunMismatch { run: usize, message: String },

    #[error("no gold segmentation for sentence '{id}'")]
    MissingGold { id: String },

    #[error("sentence '{id}': gold words do not spell the silence-free target")]
    GoldMismatch { id: String },

    #[error("sentence '{id}': {message}")]
    InvalidSegmentation { id: String, message: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("no heads to select from")]
    EmptyHeadSet,

    #[error("run set is empty")]
    NoRuns,

    #[error("threshold {0} outside [0,1]")]
    InvalidThreshold(f64),

    #[error("thresholds must be ascending with 'all' last")]
    UnsortedThresholds,

    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("constant input: correlation is undefined")]
    ConstantInput,

    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
