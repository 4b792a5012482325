use thiserror::Error;

/// Errors raised by grid construction, operators and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mollifier under-resolved: epsilon {eps} must exceed 2h = {two_h}")]
    UnderResolved { eps: f64, two_h: f64 },

    #[error("tail tolerance {tol} unachievable: bound {bound} with no exterior data")]
    TailUnachievable { tol: f64, bound: f64 },

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("degenerate operator: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
