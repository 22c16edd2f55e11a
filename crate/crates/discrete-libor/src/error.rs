use thiserror::Error;

/// Errors produced by model construction, evolution and pricing.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data failed validation (bad curve, vol matrix, atom table, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numerical argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested enumeration or expansion exceeds the configured size limit.
    #[error("size limit exceeded: {0}")]
    TooLarge(String),

    /// An operation was called out of order (e.g. stepping without drifts).
    #[error("sequencing error: {0}")]
    Sequencing(String),

    /// A path ensemble does not reach the step a payoff needs.
    #[error("horizon too short: need grid step {needed}, ensemble has {available}")]
    HorizonTooShort { needed: usize, available: usize },

    /// No Black-76 volatility reproduces the requested price.
    #[error("no implied volatility: {0}")]
    NoImpliedVol(String),

    /// A run configuration failed validation; the message names the field.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Invalid(_) | Error::Config(_))
    }
}
