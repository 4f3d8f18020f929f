use thiserror::Error;

use crate::induction::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv input has no header row")]
    MissingHeader,

    #[error("header column {position} has an empty name")]
    EmptyColumnName { position: usize },

    #[error("column {column:?} appears more than once in the header")]
    DuplicateColumn { column: String },

    #[error("outcome column {column:?} is not in the header")]
    UnknownOutcomeColumn { column: String },

    #[error("no attribute columns besides the outcome column {column:?}")]
    NoAttributes { column: String },

    #[error("row {row} (line {line}) has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("dataset has no data rows")]
    EmptyData,

    #[error("row {row} has {found} attribute values, expected {expected}")]
    RowArity {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("entropy of an empty tally is undefined")]
    EmptyTally,

    #[error("partition totals {found} do not sum to the node total {expected}")]
    PartitionMismatch { expected: usize, found: usize },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("query has no value for attribute {attribute:?}")]
    MissingAttribute { attribute: String },

    #[error("unknown attribute {attribute:?}")]
    UnknownAttribute { attribute: String },

    #[error("no candidate outcomes to choose from")]
    NoCandidates,

    #[error("no training rows match the constraint list")]
    NoMatchingRows,

    #[error("k-fold needs 2 <= k <= {rows}, got k = {k}")]
    InvalidFoldCount { k: usize, rows: usize },

    #[error("evaluation needs at least 2 rows, got {rows}")]
    TooFewRows { rows: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sign test needs at least one discordant pair")]
    NoDiscordantPairs,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("malformed query: {0}")]
    MalformedQuery(String),
}
