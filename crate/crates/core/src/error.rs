use thiserror::Error;

use crate::profile::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An index or dimension outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-certified precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// Malformed or inconsistent metric specification.
    #[error("invalid metric spec: {0}")]
    Spec(String),

    /// Decay order too slow for the mass to be well defined.
    #[error(
        "mass not well defined: decay order tau = {tau} must exceed (n-2k)/(k+1) = {threshold} (n = {n}, k = {k})"
    )]
    NotWellDefined { n: usize, k: usize, tau: f64, threshold: f64 },

    /// A point requested inside the excised domain.
    #[error("point {point:?} lies inside the excised domain")]
    Excised { point: Vec<f64> },

    /// The conformal factor is not constant on a boundary surface.
    #[error("u is not constant on the surface: deviation {deviation:e} at {point:?}")]
    NotConstantOnSurface { deviation: f64, point: Vec<f64> },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
