use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A line of an input file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A sentence parsed syntactically but its tree is invalid.
    #[error("sentence {sentence}: {message}")]
    Structure { sentence: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty vocabulary: no item reaches min_count {min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unknown word: {0:?}")]
    UnknownWord(String),

    #[error("similarity undefined for zero vector of {0:?}")]
    ZeroVector(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("exact objective refused: V*Fv = {size} exceeds {limit}")]
    TooLarge { size: u64, limit: u64 },

    #[error("could only generate {produced} of {needed} negative pairs")]
    NegativeStarvation { needed: usize, produced: usize },

    /// Error raised inside one cell of an experiment grid.
    #[error("cell ({row}, {column}): {source}")]
    Cell {
        row: String,
        column: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by how the caller configured things rather than
    /// by the data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) => true,
            Error::Cell { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
