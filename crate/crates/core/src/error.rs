use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A correlation profile had no usable peak (all zero).
    #[error("correlation has no peak")]
    NoPeak,

    /// A ratio was requested against a zero-energy reference.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// The receive array cannot resolve the requested number of sources.
    #[error("capability error: {0}")]
    Capability(String),

    /// Sources are too close in angle for spatial separation.
    #[error("spatial separation failed: {0}")]
    SeparationFailure(String),

    /// A zero delay leaves no room for a temporal partition.
    #[error("no temporal separation possible with zero delay")]
    NoTemporalSeparation,

    /// Numerical failure that should not happen for valid inputs.
    #[error("internal error: {0}")]
    Internal(String),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure while writing results.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
