use super::{LatticeSpec, OperatorError};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};

/// Convolution mask with odd height and width, centred on the middle tap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl Kernel {
    /// Row-major weights. Any finite values are accepted so degenerate masks
    /// can be represented; [`validate_rank_condition`](super::validate_rank_condition)
    /// catches the ones that make the model ill-posed.
    pub fn from_weights(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self, OperatorError> {
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(OperatorError::EvenKernel { rows, cols });
        }
        if weights.len() != rows * cols {
            return Err(OperatorError::Dimension { expected: rows * cols, found: weights.len() });
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(OperatorError::NonFinite { what: "kernel weight", index });
        }
        Ok(Kernel { rows, cols, weights })
    }

    pub fn identity() -> Self {
        Kernel { rows: 1, cols: 1, weights: vec![1.0] }
    }

    /// Sampled isotropic Gaussian on a `size × size` grid, normalised to sum 1.
    /// `sigma = None` uses `size / 4`.
    pub fn gaussian(size: usize, sigma: Option<f64>) -> Result<Self, OperatorError> {
        Self::gaussian_rect(size, size, sigma.unwrap_or(size as f64 / 4.0))
    }

    /// One-row Gaussian mask of length `size` for signals on a line lattice.
    pub fn gaussian_1d(size: usize, sigma: Option<f64>) -> Result<Self, OperatorError> {
        Self::gaussian_rect(1, size, sigma.unwrap_or(size as f64 / 4.0))
    }

    fn gaussian_rect(rows: usize, cols: usize, sigma: f64) -> Result<Self, OperatorError> {
        if rows % 2 == 0 || cols % 2 == 0 {
            return Err(OperatorError::EvenKernel { rows, cols });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(OperatorError::InvalidKernel(format!("gaussian sigma must be positive, got {sigma}")));
        }
        let (ci, cj) = ((rows / 2) as f64, (cols / 2) as f64);
        let mut weights = Vec::with_capacity(rows * cols);
        for a in 0..rows {
            for b in 0..cols {
                let d2 = (a as f64 - ci).powi(2) + (b as f64 - cj).powi(2);
                weights.push((-d2 / (2.0 * sigma * sigma)).exp());
            }
        }
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Ok(Kernel { rows, cols, weights })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[a * self.cols + b]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Nonzero taps as `(row offset, col offset, weight)` relative to the centre.
    fn taps(&self) -> Vec<(isize, isize, f64)> {
        let (ci, cj) = ((self.rows / 2) as isize, (self.cols / 2) as isize);
        let mut out = Vec::new();
        for a in 0..self.rows {
            for b in 0..self.cols {
                let w = self.get(a, b);
                if w != 0.0 {
                    out.push((a as isize - ci, b as isize - cj, w));
                }
            }
        }
        out
    }
}

/// Periodic 2-D convolution `y = H x` on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurOperator {
    lattice: LatticeSpec,
    kernel: Kernel,
    taps: Vec<(isize, isize, f64)>,
}

impl BlurOperator {
    pub fn new(lattice: LatticeSpec, kernel: Kernel) -> Self {
        let taps = kernel.taps();
        BlurOperator { lattice, kernel, taps }
    }

    pub fn identity(lattice: LatticeSpec) -> Self {
        Self::new(lattice, Kernel::identity())
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `(H x)[i, j] = Σ w[a, b] · x[i − a, j − b]` with centred offsets.
    pub fn apply(&self, x: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.lattice.check_len(x.len())?;
        Ok(self.correlate(x, -1, exec))
    }

    /// `Hᵀ v`: convolution with the flipped kernel.
    pub fn adjoint(&self, v: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.lattice.check_len(v.len())?;
        Ok(self.correlate(v, 1, exec))
    }

    /// `out[i, j] = Σ w · x[i + sign·di, j + sign·dj]`, periodic. Works a
    /// block of whole columns at a time so each tap is two contiguous
    /// slice updates instead of per-pixel index arithmetic.
    fn correlate(&self, x: &[f64], sign: isize, exec: Exec) -> Vec<f64> {
        let (k, n) = (self.lattice.rows(), self.lattice.cols());
        let cols_per_chunk = (4096 / k).max(1);
        let mut out = vec![0.0; x.len()];
        exec.for_chunks_mut(&mut out, k * cols_per_chunk, |c, block| {
            for (local, col) in block.chunks_mut(k).enumerate() {
                let j = c * cols_per_chunk + local;
                for &(di, dj, w) in &self.taps {
                    let sj = (j as isize + sign * dj).rem_euclid(n as isize) as usize;
                    let src = &x[sj * k..(sj + 1) * k];
                    let t = (sign * di).rem_euclid(k as isize) as usize;
                    let (head, tail) = col.split_at_mut(k - t);
                    for (o, s) in head.iter_mut().zip(&src[t..]) {
                        *o += w * s;
                    }
                    for (o, s) in tail.iter_mut().zip(&src[..t]) {
                        *o += w * s;
                    }
                }
            }
        });
        out
    }

    /// `Hᵀ H v`.
    pub fn gram_apply(&self, v: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.adjoint(&self.apply(v, exec)?, exec)
    }

    /// `HᵀH` is a periodic convolution with the kernel autocorrelation.
    /// Returns it folded onto the lattice: entry `di + dj·k` holds the weight
    /// coupling pixels whose offset is `(di, dj)` modulo the lattice.
    pub fn gram_stencil(&self) -> Vec<f64> {
        let (k, n) = (self.lattice.rows() as isize, self.lattice.cols() as isize);
        let mut table = vec![0.0; self.lattice.len()];
        for &(ai, aj, wa) in &self.taps {
            for &(bi, bj, wb) in &self.taps {
                let di = (ai - bi).rem_euclid(k);
                let dj = (aj - bj).rem_euclid(n);
                table[(di + dj * k) as usize] += wa * wb;
            }
        }
        table
    }

    /// Diagonal of `HᵀH` (a constant for a periodic convolution).
    pub fn gram_diag(&self) -> f64 {
        self.gram_stencil()[0]
    }

    /// `‖H 1‖`.
    pub fn constant_response_norm(&self) -> f64 {
        self.kernel.sum().abs() * (self.lattice.len() as f64).sqrt()
    }
}
