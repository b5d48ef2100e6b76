//! Lattice geometry, periodic difference operators and the periodic blur.
//!
//! Images are `k × n` arrays stored as column-wise stacked vectors: pixel
//! `(i, j)` lives at index `i + j·k`. Every operator here is matrix-free; the
//! dense assembly helpers exist for the small-N estimators and for tests.

mod blur;
mod diff;
mod gram;

pub use blur::{BlurOperator, Kernel};
pub use diff::{DiffKind, DiffOperator};
pub use gram::{assemble_q_dense, q_diagonal, validate_rank_condition, weighted_gram_matvec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("lattice must be at least 1x1, got {k}x{n}")]
    EmptyLattice { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("kernel dimensions must be odd, got {rows}x{cols}")]
    EvenKernel { rows: usize, cols: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("non-finite {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("rank condition fails: blur annihilates constants (|H1| = {norm:e})")]
    RankCondition { norm: f64 },
    #[error("dense assembly limited to N <= {max}, got {n}")]
    Capacity { n: usize, max: usize },
}

/// `k` rows by `n` columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    k: usize,
    n: usize,
}

impl LatticeSpec {
    pub fn new(k: usize, n: usize) -> Result<Self, OperatorError> {
        if k == 0 || n == 0 {
            return Err(OperatorError::EmptyLattice { k, n });
        }
        Ok(LatticeSpec { k, n })
    }

    /// A one-row lattice for signals of length `n`.
    pub fn line(n: usize) -> Result<Self, OperatorError> {
        Self::new(1, n)
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Stacked length `N = k·n`.
    pub fn len(&self) -> usize {
        self.k * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.k && j < self.n);
        i + j * self.k
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.k, idx / self.k)
    }

    /// Index of `(i + di, j + dj)` with periodic wrap.
    pub fn shifted(&self, idx: usize, di: isize, dj: isize) -> usize {
        let (i, j) = self.coords(idx);
        let i = (i as isize + di).rem_euclid(self.k as isize) as usize;
        let j = (j as isize + dj).rem_euclid(self.n as isize) as usize;
        self.index(i, j)
    }

    /// Convert a row-major `k × n` buffer (as read from an image file) into
    /// the stacked column-wise layout.
    pub fn stack_row_major(&self, row_major: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(row_major.len())?;
        let mut out = vec![0.0; self.len()];
        for i in 0..self.k {
            for j in 0..self.n {
                out[self.index(i, j)] = row_major[i * self.n + j];
            }
        }
        Ok(out)
    }

    /// Inverse of [`LatticeSpec::stack_row_major`].
    pub fn unstack_row_major(&self, stacked: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(stacked.len())?;
        let mut out = vec![0.0; self.len()];
        for i in 0..self.k {
            for j in 0..self.n {
                out[i * self.n + j] = stacked[self.index(i, j)];
            }
        }
        Ok(out)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<(), OperatorError> {
        if len != self.len() {
            return Err(OperatorError::Dimension { expected: self.len(), found: len });
        }
        Ok(())
    }
}
