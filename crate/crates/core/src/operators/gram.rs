use super::{BlurOperator, DiffOperator, OperatorError};
use crate::exec::Exec;
use crate::solvers::{DenseMatrix, DENSE_CAPACITY};

fn check_weights(d: &DiffOperator, weights: &[f64]) -> Result<(), OperatorError> {
    if weights.len() != d.rows() {
        return Err(OperatorError::Dimension { expected: d.rows(), found: weights.len() });
    }
    if let Some(index) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(OperatorError::NonFinite { what: "difference weight", index });
    }
    Ok(())
}

/// `Q v = HᵀH v + (λ/ν) Dᵀ W D v` without forming `Q`; `weights` is the
/// per-row diagonal `W = R⁻²`.
pub fn weighted_gram_matvec(
    h: &BlurOperator,
    d: &DiffOperator,
    lambda_over_nu: f64,
    weights: &[f64],
    v: &[f64],
    exec: Exec,
) -> Result<Vec<f64>, OperatorError> {
    check_weights(d, weights)?;
    if !lambda_over_nu.is_finite() {
        return Err(OperatorError::NonFinite { what: "lambda/nu", index: 0 });
    }
    let mut out = h.gram_apply(v, exec)?;
    if lambda_over_nu != 0.0 {
        let pen = d.weighted_normal_matvec(weights, v, exec)?;
        for (o, p) in out.iter_mut().zip(&pen) {
            *o += lambda_over_nu * p;
        }
    }
    Ok(out)
}

/// Diagonal of `Q`, used for the Jacobi preconditioner.
pub fn q_diagonal(
    h: &BlurOperator,
    d: &DiffOperator,
    lambda_over_nu: f64,
    weights: &[f64],
    exec: Exec,
) -> Result<Vec<f64>, OperatorError> {
    check_weights(d, weights)?;
    let base = h.gram_diag();
    let mut diag = d.weighted_normal_diag(weights, exec)?;
    diag.iter_mut().for_each(|v| *v = base + lambda_over_nu * *v);
    Ok(diag)
}

/// Dense `Q` for `N ≤ DENSE_CAPACITY`.
pub fn assemble_q_dense(
    h: &BlurOperator,
    d: &DiffOperator,
    lambda_over_nu: f64,
    weights: &[f64],
    exec: Exec,
) -> Result<DenseMatrix, OperatorError> {
    let lattice = h.lattice();
    let n = lattice.len();
    if n > DENSE_CAPACITY {
        return Err(OperatorError::Capacity { n, max: DENSE_CAPACITY });
    }
    check_weights(d, weights)?;
    let stencil = h.gram_stencil();
    let (k, cols) = (lattice.rows(), lattice.cols());
    let mut data = vec![0.0; n * n];
    exec.for_chunks_mut(&mut data, n, |p, row| {
        let (ip, jp) = lattice.coords(p);
        for (q, slot) in row.iter_mut().enumerate() {
            let (iq, jq) = lattice.coords(q);
            let di = (ip + k - iq) % k;
            let dj = (jp + cols - jq) % cols;
            *slot = stencil[di + dj * k];
        }
    });
    d.accumulate_dense(weights, lambda_over_nu, &mut data);
    DenseMatrix::from_row_major(n, data).map_err(|_| OperatorError::Dimension { expected: n * n, found: 0 })
}

/// Checks `Nul(D) ∩ Nul(H) = {0}`. For periodic differences the nullspace of
/// `D` is the constants, so this reduces to `‖H 1‖ > 1e-10 √N`; the identity
/// operator has a trivial nullspace.
pub fn validate_rank_condition(h: &BlurOperator, d: &DiffOperator) -> Result<(), OperatorError> {
    if d.kind() == super::DiffKind::Identity {
        return Ok(());
    }
    let norm = h.constant_response_norm();
    if norm > 1e-10 * (h.lattice().len() as f64).sqrt() {
        Ok(())
    } else {
        Err(OperatorError::RankCondition { norm })
    }
}
