use thiserror::Error;

use crate::measure::QuadError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Quadrature(#[from] QuadError),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("cell {0} is empty and could not be re-inflated")]
    EmptyCell(usize),

    #[error(
        "internal consistency check failed: {what}: {lhs:.17e} vs {rhs:.17e} (tolerance {tol:.3e})"
    )]
    Consistency {
        what: &'static str,
        lhs: f64,
        rhs: f64,
        tol: f64,
    },

    #[error("scenario error at `{path}`: {message}")]
    Scenario { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of an iterative solver or of the quadrature behind it.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::EmptyCell(_) | Error::Quadrature(_)
        )
    }
}
