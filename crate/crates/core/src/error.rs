use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("empty sequence")]
    EmptySequence,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("symbol {symbol} at position {position} is out of range for {n_symbols} symbols")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        n_symbols: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("length mismatch: sequence {index} has length {found}, expected {expected}")]
    MixedLengths {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("impossible sequence")]
    ImpossibleSequence,

    #[error("impossible sequence {index} at iteration {iteration}")]
    ImpossibleTrainingSequence { index: usize, iteration: usize },

    #[error("all clusters filtered")]
    AllClustersFiltered,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
