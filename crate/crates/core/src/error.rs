use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside domain of {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("compensator undefined: {0}")]
    CompensatorUndefined(String),

    #[error("jump distribution has infinite exponential mean: {0}")]
    InfiniteMean(String),

    #[error("Lévy density is singular at y = 0")]
    Singularity,

    #[error("model violates a required assumption: {0}")]
    Assumption(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    NonConvergence { estimate: f64, error: f64 },

    #[error("no implied volatility solution: {0}")]
    NoSolution(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("model document: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
