//! Systematic-scan Gibbs sampler over `x, ν, λ, r`.
//!
//! A master ChaCha stream drives the `x`, `ν` and `λ` draws. Each sweep
//! also takes one key from it, and latent `j` draws from its own ChaCha
//! stream `j` seeded with that key, so the latent updates can run in any
//! order (or in parallel) and still give the same chain.

use super::{check_finite, EstimatorError};
use crate::model::{LatentState, ModelSpec};
use crate::operators::assemble_q_dense;
use crate::solvers::{SolverError, DENSE_CAPACITY};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

#[derive(Clone, Debug)]
pub struct GibbsOptions {
    pub seed: u64,
    /// Kept samples.
    pub samples: usize,
    /// Discarded sweeps; `None` uses 20% of `samples`.
    pub burn_in: Option<usize>,
    /// Keep every `thinning`-th sweep after burn-in.
    pub thinning: usize,
    pub init: Option<LatentState>,
    /// Hold `ν` at its initial value.
    pub freeze_nu: bool,
    /// Hold `λ` at its initial value.
    pub freeze_lambda: bool,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions {
            seed: 0,
            samples: 10_000,
            burn_in: None,
            thinning: 1,
            init: None,
            freeze_nu: false,
            freeze_lambda: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GibbsChain {
    pub seed: u64,
    pub burn_in: usize,
    pub kept: usize,
    pub thinning: usize,
    /// Running mean of the kept `x` samples.
    pub x_mean: Vec<f64>,
    /// Running unbiased variance of the kept `x` samples (zero when one
    /// sample was kept).
    pub x_var: Vec<f64>,
    pub nu_trace: Vec<f64>,
    pub lambda_trace: Vec<f64>,
    pub last: LatentState,
}

impl GibbsChain {
    pub fn x_std(&self) -> Vec<f64> {
        self.x_var.iter().map(|v| v.sqrt()).collect()
    }
}

/// `x ~ N(Q⁻¹Hᵀy, (νQ)⁻¹)` via a Cholesky factor of `νQ`.
pub fn draw_x<R: Rng + ?Sized>(
    state: &LatentState,
    y: &[f64],
    model: &ModelSpec,
    rng: &mut R,
) -> Result<Vec<f64>, EstimatorError> {
    let exec = model.exec();
    let w = model.row_weights(&state.r);
    let mut q = assemble_q_dense(model.blur(), model.diff(), state.lambda / state.nu, &w, exec)?;
    q.scale(state.nu);
    let chol = q.cholesky(exec)?;
    let mut rhs = model.blur().adjoint(y, exec)?;
    rhs.iter_mut().for_each(|v| *v *= state.nu);
    let mean = chol.solve(&rhs)?;
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
    Ok(chol.correlated_draw(&mean, &z))
}

fn gamma_sample<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64, EstimatorError> {
    let g = Gamma::new(shape, 1.0 / rate)
        .map_err(|_| EstimatorError::NonFinite { iteration: 0, variable: "gamma parameters", value: rate })?;
    loop {
        let v: f64 = g.sample(rng);
        if v > 0.0 {
            return Ok(v);
        }
    }
}

/// `ν ~ Gam(N/2 + α_ν, ½‖y − Hx‖² + β_ν)`.
pub fn draw_nu<R: Rng + ?Sized>(
    state: &LatentState,
    y: &[f64],
    model: &ModelSpec,
    rng: &mut R,
) -> Result<f64, EstimatorError> {
    let exec = model.exec();
    let hx = model.blur().apply(&state.x, exec)?;
    let res = exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2));
    let rate = check_finite(0, "nu rate", 0.5 * res + model.hyper().beta_nu)?;
    gamma_sample(model.nu_shape(), rate, rng)
}

/// `λ ~ Gam(M/2 + α_λ, ½‖R⁻¹Dx‖² + β_λ)`.
pub fn draw_lambda<R: Rng + ?Sized>(state: &LatentState, model: &ModelSpec, rng: &mut R) -> Result<f64, EstimatorError> {
    let exec = model.exec();
    let dx = model.diff().apply(&state.x, exec)?;
    let sums = model.latent_sums(&dx);
    let pen = exec.sum(sums.len(), |j| sums[j] / (2.0 * state.r[j]));
    let rate = check_finite(0, "lambda rate", 0.5 * pen + model.hyper().beta_lambda)?;
    gamma_sample(model.lambda_shape(), rate, rng)
}

/// One draw of latent `index` from its GIG conditional.
pub fn draw_latent<R: Rng + ?Sized>(
    state: &LatentState,
    model: &ModelSpec,
    index: usize,
    rng: &mut R,
) -> Result<f64, EstimatorError> {
    let dx = model.diff().apply(&state.x, model.exec())?;
    let s: f64 = (0..model.m()).filter(|&i| model.latent_of_row(i) == index).map(|i| dx[i] * dx[i]).sum();
    Ok(model.latent_conditional(index, state.lambda, s)?.sample(rng))
}

/// All latents at once; latent `j` uses stream `j` of a ChaCha generator
/// seeded with `key`.
pub fn draw_latents(state: &LatentState, model: &ModelSpec, key: u64) -> Result<Vec<f64>, EstimatorError> {
    let dx = model.diff().apply(&state.x, model.exec())?;
    let sums = model.latent_sums(&dx);
    let draws = model.exec().map(sums.len(), |j| {
        let g = model.latent_conditional(j, state.lambda, sums[j])?;
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(j as u64);
        Ok::<f64, EstimatorError>(g.sample(&mut rng))
    });
    draws.into_iter().collect()
}

pub fn gibbs_run(y: &[f64], model: &ModelSpec, opts: &GibbsOptions) -> Result<GibbsChain, EstimatorError> {
    if opts.samples == 0 {
        return Err(EstimatorError::Options("at least one kept sample is required".into()));
    }
    if opts.thinning == 0 {
        return Err(EstimatorError::Options("thinning must be at least 1".into()));
    }
    let n = model.n();
    if n > DENSE_CAPACITY {
        return Err(SolverError::Capacity { n, max: DENSE_CAPACITY }.into());
    }
    let mut s = match &opts.init {
        Some(init) => {
            init.validate(model)?;
            init.clone()
        }
        None => LatentState::initial(y, model)?,
    };
    let burn_in = opts.burn_in.unwrap_or(opts.samples / 5);
    let sweeps = burn_in + opts.samples * opts.thinning;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut kept = 0usize;
    let mut nu_trace = Vec::with_capacity(opts.samples);
    let mut lambda_trace = Vec::with_capacity(opts.samples);

    for sweep in 0..sweeps {
        s.x = draw_x(&s, y, model, &mut rng)?;
        if !opts.freeze_nu {
            s.nu = draw_nu(&s, y, model, &mut rng)?;
        }
        if !opts.freeze_lambda {
            s.lambda = draw_lambda(&s, model, &mut rng)?;
        }
        let key = rng.next_u64();
        s.r = draw_latents(&s, model, key)?;

        // Keep the last sweep of each thinning block, so the final sweep is kept.
        if sweep >= burn_in && (sweep + 1 - burn_in) % opts.thinning == 0 {
            kept += 1;
            let k = kept as f64;
            for ((m, v), x) in mean.iter_mut().zip(m2.iter_mut()).zip(&s.x) {
                let d = x - *m;
                *m += d / k;
                *v += d * (x - *m);
            }
            nu_trace.push(s.nu);
            lambda_trace.push(s.lambda);
        }
    }
    let denom = if kept > 1 { (kept - 1) as f64 } else { 1.0 };
    let x_var = if kept > 1 { m2.iter().map(|v| v / denom).collect() } else { vec![0.0; n] };
    Ok(GibbsChain {
        seed: opts.seed,
        burn_in,
        kept,
        thinning: opts.thinning,
        x_mean: mean,
        x_var,
        nu_trace,
        lambda_trace,
        last: s,
    })
}
