use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input violates an operation's precondition (for example an erased
    /// value reached an operation that needs a total function).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The two-phase query protocol was broken.
    #[error("query protocol violation: {0}")]
    Protocol(String),

    /// A size or work cap was exceeded.
    #[error("resource cap exceeded: {what} (cap {cap})")]
    Resource { what: String, cap: String },

    #[error("parse error at line {line}, offset {offset}: {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, cap: impl ToString) -> Self {
        Error::Resource {
            what: what.into(),
            cap: cap.to_string(),
        }
    }
}
