use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid language profile: {0}")]
    InvalidProfile(String),

    /// A Keep or Delete op names a token that is not present in the old sequence.
    #[error("edit script does not match old tokens at position {position}: expected {expected:?}, found {found:?}")]
    Mismatch {
        position: usize,
        expected: String,
        found: Option<String>,
    },

    #[error("old and new code have no line-level differences")]
    EmptyDiff,

    #[error("old code has no tokens")]
    EmptyCode,

    #[error("edit script has no KEEP tokens")]
    NoKeep,

    #[error("sample needs {0} sentinels but only {max} are available", max = crate::noising::MAX_SENTINELS)]
    SentinelOverflow(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line count mismatch: {left} lines in {left_name} vs {right} lines in {right_name}")]
    LengthMismatch {
        left_name: String,
        left: usize,
        right_name: String,
        right: usize,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller breaking a contract (bad input shape),
    /// as opposed to environmental failures.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::InvalidProfile(_)
                | Error::Config(_)
                | Error::LengthMismatch { .. }
                | Error::Mismatch { .. }
        )
    }
}
