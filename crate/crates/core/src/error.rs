//! Error type shared by every module in this crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while loading data, configuring a metric,
/// or computing one.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },

    #[error("column {column:?} row {row}: cannot parse {cell:?} as a finite number")]
    BadNumber { column: String, row: usize, cell: String },

    #[error("column {column:?} row {row}: missing value not permitted here")]
    MissingValue { column: String, row: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("distance spec does not match the schema: {0}")]
    SpecMismatch(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("score {value} for dimension {dimension} is off the rubric grid {{1, 1.5, 2, 2.5, 3, 3.5, 4}}")]
    OffGridScore { dimension: String, value: f64 },

    #[error("score sheet error: {0}")]
    Sheet(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("population table error: {0}")]
    Population(String),
}

impl Error {
    /// Convenience constructor for i/o failures tied to a path.
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), source }
    }
}
