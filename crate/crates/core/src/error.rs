use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn parse_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { context: context.into(), message: message.into() }
}
