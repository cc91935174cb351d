use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed family text; `pos` is the byte offset of the offending character.
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` requires parameter `{key}`")]
    MissingParameter { family: String, key: String },

    #[error("family `{family}` does not accept parameter `{key}`")]
    UnexpectedParameter { family: String, key: String },

    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index beyond a finite backing table.
    #[error("index {index} out of range for table of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// The underlying I/O error, if any, including one wrapped by the CSV layer.
    pub fn io_error(&self) -> Option<&std::io::Error> {
        match self {
            Error::Io(e) => Some(e),
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        }
    }

    /// True for errors caused by malformed input text rather than bad values.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownFamily(_)
                | Error::MissingParameter { .. }
                | Error::UnexpectedParameter { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
