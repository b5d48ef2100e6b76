use super::EstimatorError;
use crate::exec::Exec;
use crate::operators::{q_diagonal, weighted_gram_matvec, BlurOperator, DiffOperator};
use crate::solvers::{pcg_solve, PcgOptions, Preconditioner};

#[derive(Clone, Copy, Debug)]
pub struct TikhonovOptions {
    pub tol: f64,
    /// `None` uses `max(⌈10 √N⌉, 2N)`.
    pub max_iter: Option<usize>,
}

impl Default for TikhonovOptions {
    fn default() -> Self {
        TikhonovOptions { tol: 1e-10, max_iter: None }
    }
}

/// Minimiser of `‖y − Hx‖² + δ ‖Dx‖²`, i.e. the solution of
/// `(HᵀH + δ DᵀD) x = Hᵀy`, by Jacobi-preconditioned CG.
pub fn tikhonov_baseline(
    y: &[f64],
    h: &BlurOperator,
    d: &DiffOperator,
    delta: f64,
    opts: &TikhonovOptions,
    exec: Exec,
) -> Result<Vec<f64>, EstimatorError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(EstimatorError::Options(format!("delta must be positive, got {delta}")));
    }
    let n = h.lattice().len();
    let ones = vec![1.0; d.rows()];
    let hty = h.adjoint(y, exec)?;
    let pc = Preconditioner::jacobi(&q_diagonal(h, d, delta, &ones, exec)?);
    let mut pcg = PcgOptions::for_dimension(n);
    pcg.tol = opts.tol;
    pcg.max_iter = opts.max_iter.unwrap_or(pcg.max_iter.max(2 * n));
    let out = pcg_solve(
        |v: &[f64]| weighted_gram_matvec(h, d, delta, &ones, v, exec).expect("operator dimensions checked"),
        &hty,
        &pc,
        None,
        &pcg,
        exec,
    )?;
    Ok(out.x)
}
