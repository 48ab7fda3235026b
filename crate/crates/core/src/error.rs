use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("column for variable `{0}` missing from data header")]
    MissingColumn(String),

    #[error("unknown state `{value}` for variable `{variable}` at data row {row}")]
    UnknownState {
        variable: String,
        value: String,
        row: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("cannot form {buckets} non-empty buckets from {distinct} distinct values")]
    DegenerateBinning { buckets: usize, distinct: usize },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("edge {0} -> {1} would create a cycle")]
    Cycle(String, String),

    #[error("edge {0} -> {1} already present")]
    DuplicateEdge(String, String),

    #[error("edge {0} -> {1} not present")]
    MissingEdge(String, String),

    #[error("self loop on `{0}`")]
    SelfLoop(String),

    #[error("constraints: {0}")]
    Constraints(String),

    #[error("orientation does not match skeleton: {0}")]
    Orientation(String),

    #[error("enumeration over {states} joint states exceeds cap {cap}")]
    EnumerationTooLarge { states: u128, cap: u128 },

    #[error("contradictory evidence on `{0}`")]
    ContradictoryEvidence(String),

    #[error("models are defined over different variable sets")]
    VariableMismatch,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("within-chain variance is zero for `{0}`")]
    ConstantChain(String),

    #[error("diagnostics: {0}")]
    Diagnostics(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}
