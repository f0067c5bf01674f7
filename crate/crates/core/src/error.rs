use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The input admits no meaningful result (e.g. an all-zero coupling).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure at step {step}{context}: non-finite state")]
    Numerical { step: usize, context: String },

    #[error("instance generation failed: {message} (achieved correlation {achieved:.4})")]
    Generation { message: String, achieved: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a location such as `(run 2, weight 17)` to a numerical failure.
    pub fn with_context(self, ctx: impl AsRef<str>) -> Self {
        match self {
            Error::Numerical { step, context } => Error::Numerical {
                step,
                context: format!("{context} {}", ctx.as_ref()),
            },
            other => other,
        }
    }
}
