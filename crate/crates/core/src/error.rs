use thiserror::Error;

/// Errors raised by the library.
///
/// `Validation` covers malformed input (bad rows, bad config values, bad
/// report files); the CLI maps it to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("settings {0} and {1} are on the same side")]
    SameSide(String, String),

    #[error("no data in context {0}")]
    NoDataInContext(String),

    #[error("conditioning on null event")]
    NullEvent,

    #[error("run index {index} out of range for table with {len} runs")]
    RunIndex { index: usize, len: usize },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
