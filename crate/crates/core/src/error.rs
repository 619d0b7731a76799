use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (dimension mismatch,
    /// non-positive length, coincident points, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration value is invalid or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested link calibration cannot be met.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Channel or parameter estimation failed on the supplied samples.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
