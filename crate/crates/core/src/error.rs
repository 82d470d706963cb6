use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value at node ({a1}, {a2})")]
    NonFiniteIntegrand { a1: f64, a2: f64 },

    #[error("non-finite sample at draw {index}")]
    NonFiniteSample { index: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite drift at t = {t}, state = ({}, {})", state[0], state[1])]
    NonFiniteDrift { t: f64, state: [f64; 2] },

    #[error("point ({}, {}) is not a fixed point: drift norm {norm:e}", point[0], point[1])]
    NotFixedPoint { point: [f64; 2], norm: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
