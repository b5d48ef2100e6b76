//! Mean-field variational Bayes: `q(x) q(ν) q(λ) Π q(r_j)` with Gaussian,
//! gamma, gamma and GIG factors, updated cyclically.

use super::{check_finite, check_lambda, rel_change, rel_scalar, EstimatorError};
use crate::distributions::GigParams;
use crate::model::{LatentState, ModelSpec};
use crate::operators::assemble_q_dense;
use crate::solvers::{DenseMatrix, SolverError, DENSE_CAPACITY};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct VbOptions {
    /// Stop when the relative changes of `x̂`, `E ν` and `E λ` are all below `tol`.
    pub tol: f64,
    pub maxit: usize,
    pub init: Option<LatentState>,
}

impl Default for VbOptions {
    fn default() -> Self {
        VbOptions { tol: 1e-6, maxit: 200, init: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VbTraceEntry {
    pub iteration: usize,
    pub rel_x_change: f64,
    pub nu_mean: f64,
    pub lambda_mean: f64,
}

#[derive(Clone, Debug)]
pub struct VbState {
    pub x_mean: Vec<f64>,
    /// `C = (E ν · Q̄)⁻¹`.
    pub cov: DenseMatrix,
    pub nu_shape: f64,
    pub nu_rate: f64,
    pub lambda_shape: f64,
    pub lambda_rate: f64,
    pub r: Vec<GigParams>,
    /// `E(1/r_j)`.
    pub e_inv_r: Vec<f64>,
    /// `E((Dx)_i²)` per difference row.
    pub e_sq_diff: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<VbTraceEntry>,
}

impl VbState {
    pub fn nu_mean(&self) -> f64 {
        self.nu_shape / self.nu_rate
    }

    pub fn lambda_mean(&self) -> f64 {
        self.lambda_shape / self.lambda_rate
    }

    /// Posterior standard deviation of each pixel under `q(x)`.
    pub fn marginal_std(&self) -> Vec<f64> {
        self.cov.diag().iter().map(|v| v.sqrt()).collect()
    }
}

/// Three-term expansion `E((x_u − x_v)²) = (x̂_u − x̂_v)² + C_uu + C_vv − 2 C_uv`.
fn expected_sq_diff(model: &ModelSpec, x: &[f64], cov: &DenseMatrix) -> Vec<f64> {
    let d = model.diff();
    model.exec().map(d.rows(), |i| match d.row_support(i) {
        (u, Some(v)) => (x[u] - x[v]).powi(2) + cov.get(u, u) + cov.get(v, v) - 2.0 * cov.get(u, v),
        (u, None) => x[u] * x[u] + cov.get(u, u),
    })
}

pub fn vb_run(y: &[f64], model: &ModelSpec, opts: &VbOptions) -> Result<VbState, EstimatorError> {
    if !(opts.tol > 0.0) {
        return Err(EstimatorError::Options(format!("tol must be positive, got {}", opts.tol)));
    }
    let n = model.n();
    if n > DENSE_CAPACITY {
        return Err(SolverError::Capacity { n, max: DENSE_CAPACITY }.into());
    }
    let exec = model.exec();
    let init = match &opts.init {
        Some(s) => {
            s.validate(model)?;
            s.clone()
        }
        None => LatentState::initial(y, model)?,
    };
    let h = *model.hyper();
    let hty = model.blur().adjoint(y, exec)?;
    let hth = assemble_q_dense(model.blur(), model.diff(), 0.0, &vec![0.0; model.m()], exec)?;

    let nu_shape = model.nu_shape();
    let lambda_shape = model.lambda_shape();
    let mut nu_mean = init.nu;
    let mut lambda_mean = init.lambda;
    let mut e_inv_r: Vec<f64> = init.r.iter().map(|r| 1.0 / r).collect();
    let mut x_mean = init.x;
    let mut state = None;
    let mut trace = Vec::new();

    for it in 1..=opts.maxit {
        // q(x): N(x̂, (ν̄ Q̄)⁻¹) with R̄⁻² = ½ E(1/r)
        let w: Vec<f64> = (0..model.m()).map(|i| 0.5 * e_inv_r[model.latent_of_row(i)]).collect();
        let q = assemble_q_dense(model.blur(), model.diff(), lambda_mean / nu_mean, &w, exec)?;
        let chol = q.cholesky(exec)?;
        let x_new = chol.solve(&hty)?;
        let mut cov = chol.inverse();
        cov.scale(1.0 / nu_mean);
        let dx_rel = rel_change(&x_new, &x_mean);
        x_mean = x_new;

        // q(ν): Gam(N/2 + α_ν, ½‖y − Hx̂‖² + ½ tr(C HᵀH) + β_ν)
        let hx = model.blur().apply(&x_mean, exec)?;
        let res = exec.sum(n, |i| (y[i] - hx[i]).powi(2));
        let nu_rate = check_finite(it, "nu rate", 0.5 * res + 0.5 * cov.frobenius_dot(&hth) + h.beta_nu)?;
        let nu_new = nu_shape / nu_rate;
        let dnu = rel_scalar(nu_new, nu_mean);
        nu_mean = nu_new;

        // q(λ): Gam(M/2 + α_λ, ¼ Σ E(1/r) E((Dx)²) + β_λ)
        let e_sq = expected_sq_diff(model, &x_mean, &cov);
        let pen = exec.sum(e_sq.len(), |i| e_inv_r[model.latent_of_row(i)] * e_sq[i]);
        let lambda_rate = check_finite(it, "lambda rate", 0.25 * pen + h.beta_lambda)?;
        let lambda_new = lambda_shape / lambda_rate;
        check_lambda(it, lambda_new)?;
        let dlambda = rel_scalar(lambda_new, lambda_mean);
        lambda_mean = lambda_new;

        // q(r_j): GIG(a, λ̄ S_j / 2 + b, p − s/2) with S_j from E((Dx)²)
        let sums = latent_sums_from_rows(model, &e_sq);
        let factors = exec.map(sums.len(), |j| {
            let g = model.latent_conditional(j, lambda_mean, sums[j])?;
            let m = g.moment(-1.0)?;
            Ok::<_, EstimatorError>((g, m))
        });
        let mut r = Vec::with_capacity(factors.len());
        for (j, f) in factors.into_iter().enumerate() {
            let (g, m) = f?;
            e_inv_r[j] = check_finite(it, "E(1/r)", m)?;
            r.push(g);
        }

        trace.push(VbTraceEntry { iteration: it, rel_x_change: dx_rel, nu_mean, lambda_mean });
        let converged = dx_rel.max(dnu).max(dlambda) < opts.tol;
        state = Some(VbState {
            x_mean: x_mean.clone(),
            cov,
            nu_shape,
            nu_rate,
            lambda_shape,
            lambda_rate,
            r,
            e_inv_r: e_inv_r.clone(),
            e_sq_diff: e_sq,
            iterations: it,
            converged,
            trace: Vec::new(),
        });
        if converged {
            break;
        }
    }
    let mut out = state.ok_or_else(|| EstimatorError::Options("maxit must be at least 1".into()))?;
    out.trace = trace;
    Ok(out)
}

fn latent_sums_from_rows(model: &ModelSpec, per_row: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; model.latent_count()];
    for (i, v) in per_row.iter().enumerate() {
        s[model.latent_of_row(i)] += v;
    }
    s
}
