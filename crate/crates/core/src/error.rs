use thiserror::Error;

use crate::fixedpoint::IterationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at time step {step}, index {index}")]
    NonFinite { step: usize, index: usize },

    #[error("density must be strictly positive; found {value:e} at index {index}")]
    NonPositiveDensity { index: usize, value: f64 },

    #[error("preset requires the interval [-1, 1]; got [{a}, {b}]")]
    WrongInterval { a: f64, b: f64 },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("norm sandwich violated: lower={lower:e}, alpha={alpha_value:e}, upper={upper:e}")]
    InvariantViolation {
        lower: f64,
        alpha_value: f64,
        upper: f64,
    },

    #[error("iteration diverged at k={}: step norm grew past the guard", report.iterations_run)]
    Divergence { report: Box<IterationReport> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
