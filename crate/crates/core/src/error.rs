use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value {value} at abscissa {abscissa}")]
    NonFinite { abscissa: f64, value: f64 },

    #[error("series did not converge within {terms} terms")]
    SeriesNonConvergence { terms: u64 },

    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("degenerate evidence: marginal probability {marginal:e} of the observation is below 1e-300")]
    DegenerateEvidence { marginal: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
