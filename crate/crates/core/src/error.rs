use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::SymbolId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid UTF-8 at byte offset {offset}")]
    Utf8 { offset: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: String, expected: u32 },

    #[error("invalid data: {0}")]
    Validation(String),

    #[error("unknown symbol id {0}")]
    UnknownSymbol(SymbolId),

    #[error("{0}")]
    Domain(String),

    #[error("token not in vocabulary: {0:?}")]
    OutOfVocabulary(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit status for this error: 2 for I/O, 3 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 3,
        }
    }
}
