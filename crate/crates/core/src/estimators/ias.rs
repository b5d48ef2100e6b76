//! MAP estimation by iterative alternating sequential updates: each unknown
//! is set to its conditional mode given the newest values of the others.

use super::{check_finite, check_lambda, rel_change, rel_scalar, EstimatorError};
use crate::model::{log_posterior, LatentState, ModelSpec};
use crate::operators::{assemble_q_dense, q_diagonal, weighted_gram_matvec};
use crate::solvers::{pcg_solve, PcgOptions, Preconditioner, SolverError};
use serde::{Deserialize, Serialize};

/// How the `x` sub-problem `Q x = Hᵀy` is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XSolver {
    /// Dense Cholesky up to [`IasOptions::DENSE_AUTO_LIMIT`] unknowns, PCG above.
    Auto,
    Dense,
    Pcg,
}

#[derive(Clone, Debug)]
pub struct IasOptions {
    /// Stop once the relative 2-norm change of `x` drops below `tol`.
    pub tol: f64,
    pub maxit: usize,
    pub solver: XSolver,
    /// PCG relative residual target.
    pub pcg_tol: f64,
    /// PCG iteration cap; `None` uses `⌈10 √N⌉`.
    pub pcg_maxit: Option<usize>,
    /// When PCG hits its cap, keep the last iterate instead of failing. CG
    /// iterates decrease the quadratic energy monotonically from the warm
    /// start, so the sweep still cannot lower the posterior.
    pub pcg_inexact: bool,
    /// Starting point; `None` uses [`LatentState::initial`].
    pub init: Option<LatentState>,
    /// Record the log posterior after every sub-update (four per sweep).
    pub record_sub_updates: bool,
}

impl IasOptions {
    pub const DENSE_AUTO_LIMIT: usize = 256;
}

impl Default for IasOptions {
    fn default() -> Self {
        IasOptions {
            tol: 1e-6,
            maxit: 200,
            solver: XSolver::Auto,
            pcg_tol: 1e-8,
            pcg_maxit: None,
            pcg_inexact: true,
            init: None,
            record_sub_updates: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IasTraceEntry {
    pub iteration: usize,
    pub log_posterior: f64,
    pub rel_x_change: f64,
    pub nu: f64,
    pub lambda: f64,
    pub pcg_iterations: usize,
    /// Relative residual of the `x` solve (zero on the dense path).
    pub pcg_residual: f64,
}

#[derive(Clone, Debug)]
pub struct IasState {
    pub state: LatentState,
    pub iterations: usize,
    pub converged: bool,
    /// One entry per sweep.
    pub trace: Vec<IasTraceEntry>,
    /// Log posterior at the start and after each sub-update, when requested.
    pub sub_update_trace: Vec<f64>,
}

/// Conditional-mode update of `x`: returns the new `x`, the PCG iteration
/// count and its relative residual (zeros on the dense path).
fn update_x(
    state: &LatentState,
    hty: &[f64],
    model: &ModelSpec,
    opts: &IasOptions,
) -> Result<(Vec<f64>, usize, f64), EstimatorError> {
    let exec = model.exec();
    let w = model.row_weights(&state.r);
    let ratio = state.lambda / state.nu;
    let dense = match opts.solver {
        XSolver::Dense => true,
        XSolver::Pcg => false,
        XSolver::Auto => model.n() <= IasOptions::DENSE_AUTO_LIMIT,
    };
    if dense {
        let q = assemble_q_dense(model.blur(), model.diff(), ratio, &w, exec)?;
        let x = q.cholesky(exec)?.solve(hty)?;
        return Ok((x, 0, 0.0));
    }
    let diag = q_diagonal(model.blur(), model.diff(), ratio, &w, exec)?;
    let pc = Preconditioner::jacobi(&diag);
    let mut pcg = PcgOptions::for_dimension(model.n());
    pcg.tol = opts.pcg_tol;
    if let Some(m) = opts.pcg_maxit {
        pcg.max_iter = m;
    }
    let (h, d) = (model.blur(), model.diff());
    let out = pcg_solve(
        |v: &[f64]| weighted_gram_matvec(h, d, ratio, &w, v, exec).expect("operator dimensions checked"),
        hty,
        &pc,
        Some(&state.x),
        &pcg,
        exec,
    );
    match out {
        Ok(out) => Ok((out.x, out.iterations, out.rel_residual)),
        Err(SolverError::NotConverged { iterations, residual, last }) if opts.pcg_inexact => {
            Ok((last, iterations, residual))
        }
        Err(e) => Err(e.into()),
    }
}

fn nu_mode(model: &ModelSpec, residual_sq: f64) -> f64 {
    let h = model.hyper();
    (model.n() as f64 - 2.0 + 2.0 * h.alpha_nu) / (residual_sq + 2.0 * h.beta_nu)
}

fn lambda_mode(model: &ModelSpec, penalty: f64) -> f64 {
    let h = model.hyper();
    (model.m() as f64 - 2.0 + 2.0 * h.alpha_lambda) / (penalty + 2.0 * h.beta_lambda)
}

fn residual_sq(model: &ModelSpec, x: &[f64], y: &[f64]) -> Result<f64, EstimatorError> {
    let exec = model.exec();
    let hx = model.blur().apply(x, exec)?;
    Ok(exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2)))
}

/// `‖R⁻¹Dx‖² = Σ_i (Dx)_i² / (2 r_{ℓ(i)})` and the per-latent sums `S_j`.
fn penalty(model: &ModelSpec, x: &[f64], r: &[f64]) -> Result<(f64, Vec<f64>), EstimatorError> {
    let exec = model.exec();
    let dx = model.diff().apply(x, exec)?;
    let sums = model.latent_sums(&dx);
    let pen = exec.sum(r.len(), |j| sums[j] / (2.0 * r[j]));
    Ok((pen, sums))
}

fn r_modes(model: &ModelSpec, lambda: f64, sums: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let modes = model.exec().map(sums.len(), |j| model.latent_conditional(j, lambda, sums[j]).map(|g| g.mode()));
    let mut out = Vec::with_capacity(modes.len());
    for m in modes {
        out.push(m?);
    }
    Ok(out)
}

pub fn ias_run(y: &[f64], model: &ModelSpec, opts: &IasOptions) -> Result<IasState, EstimatorError> {
    if !(opts.tol > 0.0) {
        return Err(EstimatorError::Options(format!("tol must be positive, got {}", opts.tol)));
    }
    if model.n() < 2 || model.m() < 2 {
        return Err(EstimatorError::Options("IAS needs at least two pixels and two difference rows".into()));
    }
    let exec = model.exec();
    let mut s = match &opts.init {
        Some(init) => {
            init.validate(model)?;
            init.clone()
        }
        None => LatentState::initial(y, model)?,
    };
    let hty = model.blur().adjoint(y, exec)?;
    let mut sub_trace = Vec::new();
    if opts.record_sub_updates {
        sub_trace.push(log_posterior(&s, y, model)?);
    }
    let mut trace = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while it < opts.maxit {
        it += 1;
        let (x_new, pcg_its, pcg_res) = update_x(&s, &hty, model, opts)?;
        if let Some(v) = x_new.iter().find(|v| !v.is_finite()) {
            return Err(EstimatorError::NonFinite { iteration: it, variable: "x", value: *v });
        }
        let dx_rel = rel_change(&x_new, &s.x);
        s.x = x_new;
        if opts.record_sub_updates {
            sub_trace.push(log_posterior(&s, y, model)?);
        }

        let nu = check_finite(it, "nu", nu_mode(model, residual_sq(model, &s.x, y)?))?;
        s.nu = nu;
        if opts.record_sub_updates {
            sub_trace.push(log_posterior(&s, y, model)?);
        }

        let (pen, sums) = penalty(model, &s.x, &s.r)?;
        let lambda = lambda_mode(model, pen);
        check_lambda(it, lambda)?;
        s.lambda = lambda;
        if opts.record_sub_updates {
            sub_trace.push(log_posterior(&s, y, model)?);
        }

        let r_new = r_modes(model, s.lambda, &sums)?;
        if let Some(v) = r_new.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(EstimatorError::NonFinite { iteration: it, variable: "r", value: *v });
        }
        s.r = r_new;
        let lp = log_posterior(&s, y, model)?;
        if opts.record_sub_updates {
            sub_trace.push(lp);
        }
        trace.push(IasTraceEntry {
            iteration: it,
            log_posterior: lp,
            rel_x_change: dx_rel,
            nu: s.nu,
            lambda: s.lambda,
            pcg_iterations: pcg_its,
            pcg_residual: pcg_res,
        });
        if dx_rel < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(IasState { state: s, iterations: it, converged, trace, sub_update_trace: sub_trace })
}

/// Relative distance of each block from its conditional mode given the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointResidual {
    pub x: f64,
    pub nu: f64,
    pub lambda: f64,
    pub r: f64,
}

impl FixedPointResidual {
    pub fn max(&self) -> f64 {
        self.x.max(self.nu).max(self.lambda).max(self.r)
    }
}

pub fn fixed_point_residual(state: &LatentState, y: &[f64], model: &ModelSpec) -> Result<FixedPointResidual, EstimatorError> {
    let exec = model.exec();
    let hty = model.blur().adjoint(y, exec)?;
    let opts = IasOptions { pcg_tol: 1e-12, ..IasOptions::default() };
    let (x, _, _) = update_x(state, &hty, model, &opts)?;
    let nu = nu_mode(model, residual_sq(model, &state.x, y)?);
    let (pen, sums) = penalty(model, &state.x, &state.r)?;
    let lambda = lambda_mode(model, pen);
    let r = r_modes(model, state.lambda, &sums)?;
    Ok(FixedPointResidual {
        x: rel_change(&x, &state.x),
        nu: rel_scalar(nu, state.nu),
        lambda: rel_scalar(lambda, state.lambda),
        r: r.iter().zip(&state.r).map(|(a, b)| rel_scalar(*a, *b)).fold(0.0, f64::max),
    })
}
