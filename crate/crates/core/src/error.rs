use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the range an operation supports.
    #[error("{what} = {value} is out of range: {constraint}")]
    Range {
        what: &'static str,
        value: String,
        constraint: &'static str,
    },

    /// An input violates a mathematical precondition (e.g. a non square-full argument to `decompose`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A table or buffer would exceed the configured budget.
    #[error("{what} needs {required_bytes} bytes (limit {limit}) which exceeds the budget of limit <= {budget}")]
    Resource {
        what: &'static str,
        required_bytes: u64,
        limit: u64,
        budget: u64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn range(
        what: &'static str,
        value: impl ToString,
        constraint: &'static str,
    ) -> Self {
        Error::Range {
            what,
            value: value.to_string(),
            constraint,
        }
    }
}
