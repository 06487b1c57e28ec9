use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: malformed row: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: {msg}")]
    Data { line: usize, msg: String },

    #[error("duplicate (frame {frame}, id {id}) at lines {first_line} and {second_line}")]
    DuplicateRow {
        frame: u32,
        id: i64,
        first_line: usize,
        second_line: usize,
    },

    #[error("identity {id} appears more than once in frame {frame}")]
    DuplicateIdentity { frame: u32, id: i64 },

    #[error("frame {frame} does not follow previous frame {previous}")]
    Sequencing { frame: u32, previous: u32 },

    #[error("could not place a false positive in frame {frame} after {attempts} attempts")]
    Generation { frame: u32, attempts: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Broad failure classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Argument,
    Data,
    Io,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) | Error::Sequencing { .. } => ErrorClass::Argument,
            Error::Parse { .. }
            | Error::Data { .. }
            | Error::DuplicateRow { .. }
            | Error::DuplicateIdentity { .. }
            | Error::Generation { .. } => ErrorClass::Data,
            Error::Io { .. } => ErrorClass::Io,
        }
    }
}
