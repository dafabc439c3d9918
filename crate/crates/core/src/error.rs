use thiserror::Error;

/// Errors produced by model construction, generation, analysis and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or analysis parameter violates its documented constraint.
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter {
        name: &'static str,
        constraint: String,
    },

    /// An argument is well-typed but outside the operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested operation is not available for this model variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The core vertices of a threshold graph are not pairwise adjacent.
    #[error("core vertices {0} and {1} are not adjacent")]
    CoreNotClique(usize, usize),

    /// A bundle or config file could not be parsed.
    #[error("malformed {file}: {reason}")]
    Malformed { file: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
