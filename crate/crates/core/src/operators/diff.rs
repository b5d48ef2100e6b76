use super::{LatticeSpec, OperatorError};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffKind {
    /// Forward differences with periodic wrap: a horizontal block
    /// `x[i, j+1] − x[i, j]` followed by a vertical block `x[i+1, j] − x[i, j]`.
    /// A block is dropped when its direction has length one (so a `1 × n`
    /// lattice gives the circulant first-difference matrix).
    Periodic,
    /// `D = I`: the penalty acts on the pixel values (Lasso).
    Identity,
}

/// Sparse difference operator. Row `r` computes `x[plus(r)] − x[minus(r)]`
/// (or just `x[plus(r)]` for the identity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    lattice: LatticeSpec,
    kind: DiffKind,
    horizontal: bool,
    vertical: bool,
}

impl DiffOperator {
    pub fn periodic(lattice: LatticeSpec) -> Self {
        DiffOperator {
            lattice,
            kind: DiffKind::Periodic,
            horizontal: lattice.cols() > 1,
            vertical: lattice.rows() > 1,
        }
    }

    pub fn identity(lattice: LatticeSpec) -> Self {
        DiffOperator { lattice, kind: DiffKind::Identity, horizontal: false, vertical: false }
    }

    pub fn kind(&self) -> DiffKind {
        self.kind
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    /// Number of row blocks of length `N`.
    pub fn blocks(&self) -> usize {
        match self.kind {
            DiffKind::Identity => 1,
            DiffKind::Periodic => self.horizontal as usize + self.vertical as usize,
        }
    }

    /// Row count `M`.
    pub fn rows(&self) -> usize {
        self.blocks() * self.lattice.len()
    }

    /// `(plus, minus)` column indices of row `r`.
    pub fn row_support(&self, r: usize) -> (usize, Option<usize>) {
        let n = self.lattice.len();
        let (block, p) = (r / n, r % n);
        match self.kind {
            DiffKind::Identity => (p, None),
            DiffKind::Periodic => {
                let horizontal = self.horizontal && block == 0;
                let q = if horizontal {
                    self.lattice.shifted(p, 0, 1)
                } else {
                    self.lattice.shifted(p, 1, 0)
                };
                (q, Some(p))
            }
        }
    }

    /// Rows that touch column `p`, with sign.
    fn column_entries(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.lattice.len();
        let mut out: [(usize, f64); 4] = [(0, 0.0); 4];
        let mut len = 0;
        match self.kind {
            DiffKind::Identity => {
                out[0] = (p, 1.0);
                len = 1;
            }
            DiffKind::Periodic => {
                let mut block = 0;
                if self.horizontal {
                    out[len] = (self.lattice.shifted(p, 0, -1), 1.0);
                    out[len + 1] = (p, -1.0);
                    len += 2;
                    block += 1;
                }
                if self.vertical {
                    out[len] = (block * n + self.lattice.shifted(p, -1, 0), 1.0);
                    out[len + 1] = (block * n + p, -1.0);
                    len += 2;
                }
            }
        }
        out.into_iter().take(len)
    }

    fn check_cols(&self, len: usize) -> Result<(), OperatorError> {
        self.lattice.check_len(len)
    }

    fn check_rows(&self, len: usize) -> Result<(), OperatorError> {
        if len != self.rows() {
            return Err(OperatorError::Dimension { expected: self.rows(), found: len });
        }
        Ok(())
    }

    /// `D x`.
    pub fn apply(&self, x: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.check_cols(x.len())?;
        let mut out = vec![0.0; self.rows()];
        exec.fill(&mut out, |r| match self.row_support(r) {
            (q, Some(p)) => x[q] - x[p],
            (q, None) => x[q],
        });
        Ok(out)
    }

    /// `Dᵀ w`.
    pub fn apply_transpose(&self, w: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.check_rows(w.len())?;
        let mut out = vec![0.0; self.lattice.len()];
        exec.fill(&mut out, |p| self.column_entries(p).map(|(r, s)| s * w[r]).sum());
        Ok(out)
    }

    /// `Dᵀ W D v` with `W = diag(weights)`.
    pub fn weighted_normal_matvec(&self, weights: &[f64], v: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        let mut dv = self.apply(v, exec)?;
        self.check_rows(weights.len())?;
        for (d, w) in dv.iter_mut().zip(weights) {
            *d *= w;
        }
        self.apply_transpose(&dv, exec)
    }

    /// Diagonal of `Dᵀ W D`.
    pub fn weighted_normal_diag(&self, weights: &[f64], exec: Exec) -> Result<Vec<f64>, OperatorError> {
        self.check_rows(weights.len())?;
        let mut out = vec![0.0; self.lattice.len()];
        exec.fill(&mut out, |p| self.column_entries(p).map(|(r, _)| weights[r]).sum());
        Ok(out)
    }

    /// Add `scale · Dᵀ W D` into a dense row-major `N × N` buffer.
    pub(crate) fn accumulate_dense(&self, weights: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.lattice.len();
        for (r, &w) in weights.iter().enumerate() {
            let c = scale * w;
            match self.row_support(r) {
                (q, Some(p)) => {
                    out[q * n + q] += c;
                    out[p * n + p] += c;
                    out[q * n + p] -= c;
                    out[p * n + q] -= c;
                }
                (q, None) => out[q * n + q] += c,
            }
        }
    }
}
