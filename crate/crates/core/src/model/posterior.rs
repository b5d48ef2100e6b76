use super::{LatentState, ModelError, ModelSpec};
use crate::operators::assemble_q_dense;
use serde::{Deserialize, Serialize};

/// The log posterior split into its blocks; [`LogPosteriorTerms::total`] is
/// the value up to the omitted normalising constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPosteriorTerms {
    /// `(M/2 + α_λ − 1) ln λ − β_λ λ`
    pub lambda_prior: f64,
    /// `(N/2 + α_ν − 1) ln ν − β_ν ν`
    pub nu_prior: f64,
    /// `Σ_j (p − 1 − s/2) ln r_j − a/2 r_j − b/(2 r_j)`
    pub latent: f64,
    /// `−ν/2 ‖y − Hx‖²`
    pub likelihood: f64,
    /// `−λ/2 ‖R⁻¹Dx‖²`
    pub penalty: f64,
}

impl LogPosteriorTerms {
    pub fn total(&self) -> f64 {
        self.lambda_prior + self.nu_prior + self.latent + self.likelihood + self.penalty
    }
}

fn finite(block: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { block, value })
    }
}

pub fn log_posterior_terms(state: &LatentState, y: &[f64], model: &ModelSpec) -> Result<LogPosteriorTerms, ModelError> {
    model.check_data(y)?;
    state.validate(model)?;
    let exec = model.exec();
    let h = model.hyper();
    let mix = model.mixing();

    let hx = model.blur().apply(&state.x, exec)?;
    let res = exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2));
    let dx = model.diff().apply(&state.x, exec)?;
    let sums = model.latent_sums(&dx);
    let r = &state.r;
    let pen = exec.sum(r.len(), |j| sums[j] / (2.0 * r[j]));
    let e = model.latent_index() - 1.0;
    let (a, b) = (mix.a(), mix.b());
    let latent = exec.sum(r.len(), |j| e * r[j].ln() - 0.5 * (a * r[j] + b / r[j]));

    Ok(LogPosteriorTerms {
        lambda_prior: finite(
            "lambda prior",
            (model.lambda_shape() - 1.0) * state.lambda.ln() - h.beta_lambda * state.lambda,
        )?,
        nu_prior: finite("nu prior", (model.nu_shape() - 1.0) * state.nu.ln() - h.beta_nu * state.nu)?,
        latent: finite("latent scales", latent)?,
        likelihood: finite("likelihood", -0.5 * state.nu * res)?,
        penalty: finite("penalty", -0.5 * state.lambda * pen)?,
    })
}

/// Log joint density up to an additive constant.
pub fn log_posterior(state: &LatentState, y: &[f64], model: &ModelSpec) -> Result<f64, ModelError> {
    Ok(log_posterior_terms(state, y, model)?.total())
}

/// Both sides of the completing-the-square identity
/// `ν‖y − Hx‖² + λ‖R⁻¹Dx‖² = ν (x − x̂)ᵀQ(x − x̂) + ν (yᵀy − x̂ᵀHᵀy)`
/// with `Q = HᵀH + (λ/ν)DᵀR⁻²D` and `Q x̂ = Hᵀy`.
#[derive(Clone, Debug)]
pub struct QuadraticSplit {
    pub direct: f64,
    pub completed: f64,
    pub x_hat: Vec<f64>,
}

/// Evaluates [`QuadraticSplit`] with a dense factorisation of `Q`.
pub fn quadratic_split(state: &LatentState, y: &[f64], model: &ModelSpec) -> Result<QuadraticSplit, ModelError> {
    model.check_data(y)?;
    state.validate(model)?;
    let exec = model.exec();
    let (x, nu, lambda) = (&state.x, state.nu, state.lambda);

    let hx = model.blur().apply(x, exec)?;
    let res = exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2));
    let dx = model.diff().apply(x, exec)?;
    let w = model.row_weights(&state.r);
    let pen = exec.sum(dx.len(), |i| w[i] * dx[i] * dx[i]);
    let direct = nu * res + lambda * pen;

    let q = assemble_q_dense(model.blur(), model.diff(), lambda / nu, &w, exec)?;
    let chol = q.cholesky(exec)?;
    let hty = model.blur().adjoint(y, exec)?;
    let x_hat = chol.solve(&hty)?;
    let diff: Vec<f64> = x.iter().zip(&x_hat).map(|(a, b)| a - b).collect();
    let qd = q.mul_vec(&diff);
    let completed = nu * (exec.dot(&diff, &qd) + exec.norm_sq(y) - exec.dot(&x_hat, &hty));
    Ok(QuadraticSplit { direct, completed, x_hat })
}
