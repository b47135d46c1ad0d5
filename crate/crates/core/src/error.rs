//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for every fallible operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: malformed configuration, out-of-range arguments,
    /// inconsistent data shapes, and similar precondition violations.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A fit finished but failed its convergence gates (divergent
    /// transitions, R-hat, or effective sample size).
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Filesystem-level failure, annotated with the offending path.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed dataset content (CSV, JSON) with location context.
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
