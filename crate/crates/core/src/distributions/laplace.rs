//! Laplace densities and Gaussian scale mixtures.

use super::bessel::ln_bessel_k;
use super::gig::GigParams;
use super::DistError;
use crate::exec::Exec;
use crate::solvers::{Cholesky, DenseMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// `ln((b/2) e^{−b|x−μ|})`.
pub fn laplace1d_log_pdf(mu: f64, b: f64, x: f64) -> Result<f64, DistError> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(DistError::Domain { what: "Laplace scale", value: b });
    }
    Ok((b / 2.0).ln() - b * (x - mu).abs())
}

/// Multivariate Laplace `ML(μ, Σ)`.
#[derive(Clone, Debug)]
pub struct MvLaplaceParams {
    mu: Vec<f64>,
    sigma: DenseMatrix,
    chol: Cholesky,
}

impl MvLaplaceParams {
    pub fn new(mu: Vec<f64>, sigma: DenseMatrix) -> Result<Self, DistError> {
        if sigma.dim() != mu.len() {
            return Err(DistError::Dimension { expected: mu.len(), found: sigma.dim() });
        }
        if sigma.max_asymmetry() > 1e-12 * sigma.diag().iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            return Err(DistError::NotPositiveDefinite);
        }
        let chol = sigma.cholesky(Exec::Sequential).map_err(|_| DistError::NotPositiveDefinite)?;
        Ok(MvLaplaceParams { mu, sigma, chol })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &DenseMatrix {
        &self.sigma
    }

    /// Log density. At `x = μ` the density is finite only in one dimension;
    /// for `n ≥ 2` the singularity is reported as `+∞`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64, DistError> {
        let n = self.dim();
        if x.len() != n {
            return Err(DistError::Dimension { expected: n, found: x.len() });
        }
        let z: Vec<f64> = x.iter().zip(&self.mu).map(|(a, m)| a - m).collect();
        let w = self.chol.forward(&z);
        let c: f64 = w.iter().map(|v| v * v).sum();
        let nf = n as f64;
        let log_det = self.chol.log_det();
        if c == 0.0 {
            if n == 1 {
                // lim_{c→0} of the Bessel expression is √π/2, giving 1/√(2Σ).
                return Ok(-0.5 * (2.0f64.ln() + log_det));
            }
            return Ok(f64::INFINITY);
        }
        Ok(2.0f64.ln() - 0.5 * nf * (2.0 * PI).ln() - 0.5 * log_det
            + ln_bessel_k(nf / 2.0 - 1.0, (2.0 * c).sqrt())?
            - (nf / 2.0 - 1.0) * 0.5 * (c / 2.0).ln())
    }
}

/// Draw `μ + √r Σ^{1/2} z` with `r` from the mixing density and `z`
/// standard normal; `Σ^{1/2}` is the Cholesky factor.
pub fn gsm_sample<R: Rng + ?Sized>(
    mu: &[f64],
    sigma: &DenseMatrix,
    mixing: &GigParams,
    rng: &mut R,
) -> Result<Vec<f64>, DistError> {
    if sigma.dim() != mu.len() {
        return Err(DistError::Dimension { expected: mu.len(), found: sigma.dim() });
    }
    let chol = sigma.cholesky(Exec::Sequential).map_err(|_| DistError::NotPositiveDefinite)?;
    Ok(gsm_sample_factored(mu, &chol, mixing, rng))
}

/// As [`gsm_sample`] with a precomputed factor of `Σ`.
pub fn gsm_sample_factored<R: Rng + ?Sized>(
    mu: &[f64],
    sigma_factor: &Cholesky,
    mixing: &GigParams,
    rng: &mut R,
) -> Vec<f64> {
    let r = mixing.sample(rng);
    let z: Vec<f64> = (0..mu.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let lz = sigma_factor.lower_mul(&z);
    let sr = r.sqrt();
    mu.iter().zip(&lz).map(|(m, v)| m + sr * v).collect()
}
