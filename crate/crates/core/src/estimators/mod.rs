//! Inference engines sharing one [`ModelSpec`](crate::ModelSpec).

mod gibbs;
mod ias;
mod tikhonov;
mod vb;

pub use gibbs::{draw_lambda, draw_latent, draw_latents, draw_nu, draw_x, gibbs_run, GibbsChain, GibbsOptions};
pub use ias::{fixed_point_residual, ias_run, FixedPointResidual, IasOptions, IasState, IasTraceEntry, XSolver};
pub use tikhonov::{tikhonov_baseline, TikhonovOptions};
pub use vb::{vb_run, VbOptions, VbState, VbTraceEntry};

use crate::distributions::DistError;
use crate::model::ModelError;
use crate::operators::OperatorError;
use crate::solvers::SolverError;
use thiserror::Error;

/// λ outside `[LAMBDA_FLOOR, LAMBDA_CEIL]` aborts a run.
pub const LAMBDA_FLOOR: f64 = 1e-12;
pub const LAMBDA_CEIL: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("degenerate regularisation at iteration {iteration}: lambda = {lambda:e} ({diagnosis})")]
    Divergence { iteration: usize, lambda: f64, diagnosis: &'static str },
    #[error("non-finite {variable} update at iteration {iteration}: {value}")]
    NonFinite { iteration: usize, variable: &'static str, value: f64 },
}

pub(crate) fn check_lambda(iteration: usize, lambda: f64) -> Result<(), EstimatorError> {
    if !lambda.is_finite() {
        return Err(EstimatorError::NonFinite { iteration, variable: "lambda", value: lambda });
    }
    if lambda > LAMBDA_CEIL {
        return Err(EstimatorError::Divergence {
            iteration,
            lambda,
            diagnosis: "penalty dominates; the estimate collapses to a constant image",
        });
    }
    if lambda < LAMBDA_FLOOR {
        return Err(EstimatorError::Divergence {
            iteration,
            lambda,
            diagnosis: "penalty vanishes; the estimate reproduces the noisy data",
        });
    }
    Ok(())
}

pub(crate) fn check_finite(iteration: usize, variable: &'static str, value: f64) -> Result<f64, EstimatorError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(EstimatorError::NonFinite { iteration, variable, value })
    }
}

pub(crate) fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let num: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = new.iter().map(|a| a * a).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub(crate) fn rel_scalar(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(f64::MIN_POSITIVE)
}
