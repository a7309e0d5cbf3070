use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("search trial {trial} failed: {source}")]
    SearchTrial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("curriculum round {round} failed: {source}")]
    CurriculumRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("trace parse error at line {line}: {reason}")]
    TraceParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn invalid_config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
