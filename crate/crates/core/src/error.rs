use thiserror::Error;

use crate::simulate::MapPath;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("no root in bracket [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}")]
    NoRootInBracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    QuadratureNoConvergence { estimate: f64, error_bound: f64 },

    #[error("jump law {law} is not closed under exponential tilt by {gamma}")]
    NotClosedUnderTilt { law: String, gamma: f64 },

    #[error("moment of order {order} does not exist: chi({z}) = {chi} >= 0")]
    MomentDoesNotExist { order: usize, z: f64, chi: f64 },

    #[error("no Cramer number: {0}")]
    NoCramerRoot(String),

    #[error("simulation truncated after {events} events")]
    Truncated {
        events: u64,
        partial: Option<Box<MapPath>>,
    },

    #[error("query time {t} beyond accumulated clock {clock_end}")]
    BeyondHorizon { t: f64, clock_end: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
