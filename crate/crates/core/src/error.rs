use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate an operation's preconditions (shape, range, mismatched fields).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Mathematically undefined request, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested enumeration exceeds the configured budget.
    #[error("resource error: {0}")]
    Resource(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Parameter(format!($($arg)*)) };
}
pub(crate) use param_err;
