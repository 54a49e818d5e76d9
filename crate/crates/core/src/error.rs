use satjam_ml::MlError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<MlError> for Error {
    fn from(e: MlError) -> Self {
        match e {
            MlError::Shape(s) => Error::Shape(s),
            MlError::Domain(s) => Error::Domain(s),
            MlError::Training(s) => Error::Training(s),
            MlError::Format { offset, reason } => Error::Format { offset, reason },
            MlError::Io(e) => Error::Io(e),
        }
    }
}
