use alloc::string::String;

/// Errors raised by the metric engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("row-count mismatch: original has {original} rows, projected has {projected}")]
    RowCountMismatch { original: usize, projected: usize },
    #[error("at least 2 points are required, got {0}")]
    TooFewPoints(usize),
    #[error("original dimension {high} is smaller than projected dimension {low}")]
    DimensionOrder { high: usize, low: usize },
    #[error("non-finite coordinate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("ragged matrix: row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("k = {k} is out of range for {n} points (requires {requirement})")]
    KOutOfRange { k: usize, n: usize, requirement: &'static str },
    #[error("iteration {iteration} out of range (iterations = {iterations})")]
    IterationOutOfRange { iteration: usize, iterations: usize },
    #[error("point id {id} out of range for {n} points")]
    PointOutOfRange { id: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty cluster")]
    EmptyCluster,
    #[error("clusters overlap at point {0}")]
    OverlappingClusters(usize),
    #[error("space size mismatch: {0} vs {1} points")]
    SizeMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
