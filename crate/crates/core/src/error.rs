use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no word reaches min_count = {0}")]
    EmptyVocabulary(u64),

    #[error("cannot normalize a row whose weights sum to zero")]
    ZeroWeightRow,

    #[error("no vocabulary word shares any morphology with {0:?}")]
    NoCandidates(String),

    #[error("{0:?} is in the vocabulary; use `nearest` to inspect known words")]
    KnownWord(String),

    #[error("rank correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("non-finite parameter after training step {step}")]
    NonFinite { step: u64 },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
