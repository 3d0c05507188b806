//! Error type shared by builders, parsers and the container codec.
//!
//! Query primitives (rank, select, rmq, extract) treat malformed positions as
//! programming errors and panic; everything that consumes external data
//! (scripts, collection files, serialized containers) returns `Result`.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Underlying I/O failure.
    Io(std::io::Error),
    /// A serialized container is malformed or fails its checksum.
    Corrupt(String),
    /// Inconsistent build input (unsorted points, empty document, ...).
    Build(String),
    /// An edit script is syntactically or semantically invalid.
    Script(String),
    /// Invalid parameter combination for a generator or builder.
    Params(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Corrupt(m) => write!(f, "corrupt container: {m}"),
            Error::Build(m) => write!(f, "build error: {m}"),
            Error::Script(m) => write!(f, "script error: {m}"),
            Error::Params(m) => write!(f, "invalid parameters: {m}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
