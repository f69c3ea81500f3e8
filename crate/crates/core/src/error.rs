use std::io;

use thiserror::Error;

pub type Result<T, E = RaksError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RaksError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("keyword unresolved: `{0}` matches no node")]
    KeywordUnresolved(String),

    #[error("keywords unresolved: {}", .0.join(", "))]
    Unresolved(Vec<String>),

    #[error("invalid keyword `{0}`: no indexable tokens")]
    InvalidKeyword(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("activation level {level} out of range [0, {max}]")]
    LevelOutOfRange { level: u32, max: u32 },

    #[error("infeasible path: length {length} cannot have coarse score {score}")]
    InfeasiblePath { length: usize, score: u32 },

    #[error("no connected node pair found within {attempts} attempts")]
    NoConnectedPair { attempts: usize },

    #[error("not a raks index (bad magic)")]
    BadMagic,

    #[error("unsupported index format version {0}")]
    UnsupportedVersion(u8),

    #[error("corrupt index: {0}")]
    Corrupt(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
