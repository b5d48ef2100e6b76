//! Linear-algebra kernels: matrix-free preconditioned conjugate gradients and
//! dense Cholesky factorisation.

mod dense;
mod pcg;

pub use dense::{Cholesky, DenseMatrix, DENSE_CAPACITY};
pub use pcg::{pcg_solve, PcgOptions, PcgOutcome, Preconditioner};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },
    #[error("dense path limited to {max} unknowns, problem has {n}; use the matrix-free IAS estimator for large images")]
    Capacity { n: usize, max: usize },
    #[error("PCG did not reach the tolerance in {iterations} iterations (relative residual {residual:e})")]
    /// `last` is the final iterate, which has the smallest energy-norm error
    /// of all iterates.
    NotConverged { iterations: usize, residual: f64, last: Vec<f64> },
    #[error("PCG breakdown at iteration {iteration}: operator not positive definite or non-finite values")]
    Breakdown { iteration: usize },
}
