use thiserror::Error;

/// Errors produced by the diffusion, Green-function and last-passage machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A drift or volatility evaluation returned a non-finite value, or the
    /// volatility was not strictly positive.
    #[error("coefficient error at x = {x}: {reason}")]
    Coefficient { x: f64, reason: String },

    /// Both scale limits are infinite, so the diffusion is recurrent.
    #[error("diffusion is not transient: s(l+) = {s_ell}, s(r-) = {s_r}")]
    NotTransient { s_ell: f64, s_r: f64 },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The numerical eigenfunction solver failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// A special-function value overflows double precision.
    #[error("range error: {0}")]
    Range(String),

    /// The Laplace transform returned a non-finite value at an abscissa
    /// requested by the inversion.
    #[error("inversion error: transform is not finite at q = {q} ({value})")]
    Inversion { q: f64, value: f64 },

    /// A spec document could not be parsed or validated.
    #[error("spec document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
