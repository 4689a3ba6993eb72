use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("point {index} out of range for a space of {len} points")]
    InvalidPoint { index: usize, len: usize },

    #[error("empty request multiset")]
    EmptyMultiset,

    #[error("path has two consecutive multisets at position {0} and multiset pairs are disabled")]
    ConsecutiveMultisets(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segment of {len} requests exceeds the 2D = {limit} window")]
    SegmentTooLong { len: usize, limit: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("LP parse error at line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error("LP solution is not optimal ({0})")]
    NotOptimal(String),

    #[error("game state {state} does not admit a {play} play")]
    WrongState { state: String, play: &'static str },

    #[error("policy never migrated to the OPT position within {phases} finishing phases")]
    NonCompetitive { phases: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
