use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a distribution function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violated one of its invariants. `key` names the offending field.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    /// The allocation cannot support the UE2 downlink threshold (α₂ − α₁γ ≤ 0).
    #[error("rate condition violated: {0}")]
    RateCondition(String),

    /// A closed form does not apply to this parameterization; fall back to Monte Carlo.
    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("diversity slope: {0}")]
    Slope(String),

    #[error("missing outage entry for link {0}")]
    MissingOutage(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
