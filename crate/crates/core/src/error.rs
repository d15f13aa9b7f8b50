use num_complex::Complex64;
use thiserror::Error;

use crate::fd::EigenPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `α₀d/π` is (numerically) a nonzero integer; the transverse basis degenerates.
    #[error("forbidden regime: alpha0 * d / pi = {ratio} is too close to a nonzero integer")]
    Regime { ratio: f64 },

    #[error("derivative of order {order} requested from a non-smooth (box) profile")]
    NonSmoothProfile { order: u8 },

    #[error("x2 = {x2} lies outside [0, {d}]")]
    Domain { x2: f64, d: f64 },

    #[error("spectral parameter {z} lies on the essential spectrum [{threshold}, inf)")]
    Spectrum { z: Complex64, threshold: f64 },

    #[error("tan/cot argument too close to a pole (margin {margin:e})")]
    NumericalMargin { margin: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("zero pivot in banded LU at column {column} (shift {sigma})")]
    SingularShift { sigma: Complex64, column: usize },

    #[error("inverse iteration did not converge in {iterations} steps (residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        best: Box<EigenPair>,
    },

    #[error("decay fit failed: {0}")]
    Fit(String),
}
