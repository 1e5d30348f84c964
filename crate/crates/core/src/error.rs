use std::path::PathBuf;

/// Errors raised by the library. Mathematical outcomes such as a failed
/// gcd step or an empty scan are values, not errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("resource cap exceeded: {what} exceeds the configured cap of {cap}")]
    Resource { what: String, cap: u64 },

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn fixture(msg: impl Into<String>) -> Self {
        Error::Fixture(msg.into())
    }
}
