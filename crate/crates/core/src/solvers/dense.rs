//! Dense symmetric positive-definite matrices and their Cholesky factors.

use super::SolverError;
use crate::exec::Exec;

/// Largest system the dense paths accept.
pub const DENSE_CAPACITY: usize = 4096;

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// Build from row-major data; `data.len()` must be a perfect square.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, SolverError> {
        if data.len() != n * n {
            return Err(SolverError::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SolverError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(SolverError::DimensionMismatch { expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "dimension mismatch in dense matvec");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Σ_ij A_ij B_ij`, i.e. `tr(A Bᵀ)`.
    pub fn frobenius_dot(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn cholesky(&self, exec: Exec) -> Result<Cholesky, SolverError> {
        Cholesky::factor(self, exec)
    }
}

/// Lower-triangular factor `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle; entries above the diagonal are zero.
    l: Vec<f64>,
    exec: Exec,
}

impl Cholesky {
    /// Row-oriented Cholesky–Crout. Rows below the current pivot are
    /// independent once the pivot row is final, so they are filled in
    /// parallel.
    pub fn factor(a: &DenseMatrix, exec: Exec) -> Result<Self, SolverError> {
        let n = a.n;
        if n > DENSE_CAPACITY {
            return Err(SolverError::Capacity { n, max: DENSE_CAPACITY });
        }
        // Row fan-out only pays off once rows are long enough.
        let exec = if n < 128 { Exec::Sequential } else { exec };
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let (head, below) = l.split_at_mut((j + 1) * n);
            let row_j = &mut head[j * n..];
            let s: f64 = row_j[..j].iter().map(|v| v * v).sum();
            let pivot = a.get(j, j) - s;
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(SolverError::NotSpd { pivot: j, value: pivot });
            }
            let ljj = pivot.sqrt();
            row_j[j] = ljj;
            let row_j = &row_j[..j];
            exec.for_chunks_mut(below, n, |c, row_i| {
                let i = j + 1 + c;
                let dot: f64 = row_i[..j].iter().zip(row_j).map(|(x, y)| x * y).sum();
                row_i[j] = (a.get(i, j) - dot) / ljj;
            });
        }
        Ok(Cholesky { n, l, exec })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Solve `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / self.at(i, i);
        }
        z
    }

    /// Solve `Lᵀ x = z`.
    pub fn backward(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.at(i, i);
            let xi = x[i];
            let row = &self.l[i * n..i * n + i];
            for (k, &lik) in row.iter().enumerate() {
                x[k] -= lik * xi;
            }
        }
        x
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        if b.len() != self.n {
            return Err(SolverError::DimensionMismatch { expected: self.n, found: b.len() });
        }
        Ok(self.backward(&self.forward(b)))
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.at(i, i).ln()).sum::<f64>()
    }

    /// Full inverse `A⁻¹`, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let cols: Vec<Vec<f64>> = self.exec.map(n, |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.backward(&self.forward(&e))
        });
        let mut out = DenseMatrix::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                out.set(i, j, col[i]);
            }
        }
        // Symmetrise away rounding noise.
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    /// `mean + L⁻ᵀ z`: a draw from `N(mean, A⁻¹)` when `z` is standard normal.
    pub fn correlated_draw(&self, mean: &[f64], z: &[f64]) -> Vec<f64> {
        let w = self.backward(z);
        mean.iter().zip(&w).map(|(m, d)| m + d).collect()
    }

    /// `L v`.
    pub fn lower_mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.l[i * n..i * n + i + 1].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}
