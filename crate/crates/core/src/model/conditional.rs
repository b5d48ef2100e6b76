use super::{LatentState, ModelError, ModelSpec};
use crate::distributions::GigParams;
use crate::operators::assemble_q_dense;
use crate::solvers::{Cholesky, DenseMatrix};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinate {
    X,
    Nu,
    Lambda,
    R(usize),
}

/// Full conditional of one block of unknowns given all the others.
#[derive(Clone, Debug)]
pub enum Conditional {
    /// `N(mean, (ν Q)⁻¹)`.
    X { mean: Vec<f64>, nu: f64, q: DenseMatrix, factor: Cholesky },
    /// `Gam(shape, rate)`.
    Nu { shape: f64, rate: f64 },
    Lambda { shape: f64, rate: f64 },
    R { index: usize, params: GigParams },
}

fn gamma_log_pdf(shape: f64, rate: f64, v: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * v.ln() - rate * v
}

impl Conditional {
    /// Log density evaluated at the matching component of `state`.
    pub fn log_density_at(&self, state: &LatentState) -> Result<f64, ModelError> {
        let v = match self {
            Conditional::X { mean, nu, q, factor } => {
                let n = mean.len() as f64;
                let d: Vec<f64> = state.x.iter().zip(mean).map(|(a, b)| a - b).collect();
                let qd = q.mul_vec(&d);
                let quad: f64 = d.iter().zip(&qd).map(|(a, b)| a * b).sum();
                0.5 * (n * nu.ln() + factor.log_det()) - 0.5 * n * (2.0 * PI).ln() - 0.5 * nu * quad
            }
            Conditional::Nu { shape, rate } => gamma_log_pdf(*shape, *rate, state.nu),
            Conditional::Lambda { shape, rate } => gamma_log_pdf(*shape, *rate, state.lambda),
            Conditional::R { index, params } => params.log_pdf(state.r[*index])?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite { block: "conditional density", value: v })
        }
    }

    /// Scalar mode; the mean vector for `X`.
    pub fn mode(&self) -> Vec<f64> {
        match self {
            Conditional::X { mean, .. } => mean.clone(),
            Conditional::Nu { shape, rate } | Conditional::Lambda { shape, rate } => {
                vec![((shape - 1.0) / rate).max(0.0)]
            }
            Conditional::R { params, .. } => vec![params.mode()],
        }
    }
}

fn gamma_rate(value: f64, what: &'static str) -> Result<f64, ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { block: what, value })
    }
}

/// Parameters of the full conditional of `which`:
///
/// * `x | · ~ N(Q⁻¹Hᵀy, (νQ)⁻¹)`
/// * `ν | · ~ Gam(N/2 + α_ν, ½‖y − Hx‖² + β_ν)`
/// * `λ | · ~ Gam(M/2 + α_λ, ½‖R⁻¹Dx‖² + β_λ)`
/// * `r_j | · ~ GIG(a, λ S_j / 2 + b, p − s/2)`
pub fn conditional_params(
    state: &LatentState,
    y: &[f64],
    model: &ModelSpec,
    which: Coordinate,
) -> Result<Conditional, ModelError> {
    model.check_data(y)?;
    state.validate(model)?;
    let exec = model.exec();
    let h = model.hyper();
    match which {
        Coordinate::X => {
            let w = model.row_weights(&state.r);
            let q = assemble_q_dense(model.blur(), model.diff(), state.lambda / state.nu, &w, exec)?;
            let factor = q.cholesky(exec)?;
            let mean = factor.solve(&model.blur().adjoint(y, exec)?)?;
            Ok(Conditional::X { mean, nu: state.nu, q, factor })
        }
        Coordinate::Nu => {
            let hx = model.blur().apply(&state.x, exec)?;
            let res = exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2));
            Ok(Conditional::Nu { shape: model.nu_shape(), rate: gamma_rate(0.5 * res + h.beta_nu, "nu rate")? })
        }
        Coordinate::Lambda => {
            let dx = model.diff().apply(&state.x, exec)?;
            let w = model.row_weights(&state.r);
            let pen = exec.sum(dx.len(), |i| w[i] * dx[i] * dx[i]);
            Ok(Conditional::Lambda {
                shape: model.lambda_shape(),
                rate: gamma_rate(0.5 * pen + h.beta_lambda, "lambda rate")?,
            })
        }
        Coordinate::R(index) => {
            if index >= model.latent_count() {
                return Err(ModelError::Dimension { what: "latent index", expected: model.latent_count(), found: index });
            }
            let dx = model.diff().apply(&state.x, exec)?;
            let s: f64 = (0..model.m())
                .filter(|&i| model.latent_of_row(i) == index)
                .map(|i| dx[i] * dx[i])
                .sum();
            Ok(Conditional::R { index, params: model.latent_conditional(index, state.lambda, s)? })
        }
    }
}
