use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("state space has {0} states, above the guard of {1}")]
    StateSpaceTooLarge(usize, usize),

    #[error("jump counters were not recorded for this trajectory")]
    MissingCounters,

    #[error("sample grid too coarse: {0}")]
    CoarseGrid(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("simplex constraint violated: {0}")]
    Simplex(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
