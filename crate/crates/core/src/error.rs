use num_complex::Complex64;
use thiserror::Error;

use crate::semigroup::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolvent solver did not converge after {iterations} iterations (residual {residual:e}, last iterate {last})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Complex64,
    },

    /// A closed-form expression would divide by (numerically) zero.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    /// Two routes that must agree by theory did not.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration {
        t: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
