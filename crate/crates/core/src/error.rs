use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation overflowed to a non-finite value.
    #[error("range error: {0}")]
    Range(String),

    /// Power computation failed for a specific (group, user) cell.
    #[error("power matrix entry (group {group}, user {user}): {source}")]
    PowerEntry {
        group: usize,
        user: usize,
        #[source]
        source: Box<Error>,
    },

    /// Inputs disagree on shape, or an argument is outside its allowed range.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("configuration error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("malformed configuration document: {0}")]
    ConfigSyntax(String),

    /// A configuration parsed but violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_owned(),
            message: msg.into(),
        }
    }
}
