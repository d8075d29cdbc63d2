use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A path had an increment outside `{0, 1}` or was otherwise malformed.
    #[error("invalid path: {0}")]
    InvalidPath(String),
    /// Bridge endpoints that admit no up-right path.
    #[error("empty bridge state space: {0}")]
    EmptyStateSpace(String),
    /// A parameter lies outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An enumeration would exceed its configured size guard.
    #[error("enumeration guard exceeded: {what} needs {needed}, guard is {guard}")]
    GuardExceeded {
        what: &'static str,
        needed: u128,
        guard: u128,
    },
    /// The rejection sampler hit its trial limit.
    #[error("no acceptance after {trials} trials (running acceptance estimate {estimate:e})")]
    MaxTrials { trials: u64, estimate: f64 },
    /// The conditional law is undefined because every weight vanishes.
    #[error("acceptance probability is zero")]
    ZeroAcceptance,
    /// A query fell outside the simulated window.
    #[error("outside window: {0}")]
    OutOfWindow(String),
    /// Filesystem or serialization failure in the harness.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
