//! The hierarchical posterior.
//!
//! With `y = Hx + e`, `e ~ N(0, ν⁻¹I)`, a scale-mixture TV prior
//! `(Dx)_i | r ~ N(0, 2 r_{ℓ(i)}/λ)` with GIG mixing on every latent `r_j`,
//! and `Gam(α, β)` hyperpriors on `λ` and `ν`, the log joint density is
//!
//! ```text
//! (M/2 + α_λ − 1) ln λ + (N/2 + α_ν − 1) ln ν + Σ_j (p − 1 − s/2) ln r_j
//!   − ν/2 ‖y − Hx‖² − λ/2 Σ_i (Dx)_i² / (2 r_{ℓ(i)})
//!   − a/2 Σ r_j − b/2 Σ 1/r_j − β_λ λ − β_ν ν
//! ```
//!
//! up to a constant. `M` is the number of difference rows, `ℓ` maps rows to
//! latents and `s` is the number of rows sharing one latent (one for the
//! per-edge priors, two for the bivariate Laplace prior on a 2-D lattice).

mod conditional;
mod posterior;

pub use conditional::{conditional_params, Conditional, Coordinate};
pub use posterior::{log_posterior, log_posterior_terms, quadratic_split, LogPosteriorTerms, QuadraticSplit};

use crate::distributions::{DistError, GigParams};
use crate::exec::Exec;
use crate::operators::{validate_rank_condition, BlurOperator, DiffOperator, LatticeSpec, OperatorError};
use crate::solvers::SolverError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("hyperparameter {name} must be finite and non-negative, got {value}")]
    Hyper { name: &'static str, value: f64 },
    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("blur and difference operators live on different lattices")]
    LatticeMismatch,
    #[error("{what}: expected length {expected}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("state component {what} must be positive and finite, got {value}")]
    InvalidState { what: &'static str, value: f64 },
    #[error("log-posterior block '{block}' is not finite ({value})")]
    NonFinite { block: &'static str, value: f64 },
    #[error(
        "latent {index} has a degenerate conditional (zero difference under a mixing density with b = 0); \
         use the safeguarded Laplace prior (b > 0)"
    )]
    DegenerateLatent { index: usize },
}

/// Gamma hyperprior parameters; all zero gives the improper `p(θ) ∝ 1/θ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha_lambda: f64,
    pub beta_lambda: f64,
    pub alpha_nu: f64,
    pub beta_nu: f64,
}

impl HyperParams {
    pub fn new(alpha_lambda: f64, beta_lambda: f64, alpha_nu: f64, beta_nu: f64) -> Result<Self, ModelError> {
        let h = HyperParams { alpha_lambda, beta_lambda, alpha_nu, beta_nu };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("alpha_lambda", self.alpha_lambda),
            ("beta_lambda", self.beta_lambda),
            ("alpha_nu", self.alpha_nu),
            ("beta_nu", self.beta_nu),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ModelError::Hyper { name, value });
            }
        }
        Ok(())
    }
}

/// Default safeguard for the Laplace prior: mixing `GIG(2, 0.001, 1)`.
pub const DEFAULT_SAFEGUARD_B: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorVariant {
    /// Per-edge latents with mixing `GIG(2, safeguard_b, 1)`; `safeguard_b = 0`
    /// is the exact Laplace-difference prior.
    LaplaceTv { safeguard_b: f64 },
    /// Per-edge latents with mixing `GIG(0, w, −w/2)`, i.e. Student-t
    /// differences with `w` degrees of freedom.
    StudentTv { dof: f64 },
    /// One latent per pixel shared by its horizontal and vertical difference.
    Laplace2d { mixing: GigParams },
    /// Per-edge latents with an arbitrary GIG mixing density.
    CustomGig { mixing: GigParams },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatentLayout {
    PerRow,
    PerPixel,
}

impl Default for PriorVariant {
    fn default() -> Self {
        PriorVariant::LaplaceTv { safeguard_b: DEFAULT_SAFEGUARD_B }
    }
}

impl PriorVariant {
    pub fn mixing(&self) -> Result<GigParams, ModelError> {
        match *self {
            PriorVariant::LaplaceTv { safeguard_b } => {
                if !(safeguard_b >= 0.0) || !safeguard_b.is_finite() {
                    return Err(ModelError::Prior(format!("safeguard b must be >= 0, got {safeguard_b}")));
                }
                Ok(GigParams::new(2.0, safeguard_b, 1.0)?)
            }
            PriorVariant::StudentTv { dof } => {
                if !(dof > 0.0) || !dof.is_finite() {
                    return Err(ModelError::Prior(format!("degrees of freedom must be > 0, got {dof}")));
                }
                Ok(GigParams::new(0.0, dof, -dof / 2.0)?)
            }
            PriorVariant::Laplace2d { mixing } | PriorVariant::CustomGig { mixing } => Ok(mixing),
        }
    }

    pub fn layout(&self) -> LatentLayout {
        match self {
            PriorVariant::Laplace2d { .. } => LatentLayout::PerPixel,
            _ => LatentLayout::PerRow,
        }
    }

    /// Exact Laplace: mixing `b = 0`, so a zero difference has no valid
    /// conditional for its latent.
    pub fn is_unsafeguarded(&self) -> Result<bool, ModelError> {
        Ok(self.mixing()?.b() == 0.0)
    }
}

/// Geometry, forward model, difference operator, hyperpriors and prior.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    blur: BlurOperator,
    diff: DiffOperator,
    hyper: HyperParams,
    prior: PriorVariant,
    mixing: GigParams,
    exec: Exec,
}

impl ModelSpec {
    pub fn new(
        blur: BlurOperator,
        diff: DiffOperator,
        hyper: HyperParams,
        prior: PriorVariant,
    ) -> Result<Self, ModelError> {
        if blur.lattice() != diff.lattice() {
            return Err(ModelError::LatticeMismatch);
        }
        hyper.validate()?;
        let mixing = prior.mixing()?;
        validate_rank_condition(&blur, &diff)?;
        Ok(ModelSpec { blur, diff, hyper, prior, mixing, exec: Exec::default() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn blur(&self) -> &BlurOperator {
        &self.blur
    }

    pub fn diff(&self) -> &DiffOperator {
        &self.diff
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn prior(&self) -> &PriorVariant {
        &self.prior
    }

    pub fn mixing(&self) -> &GigParams {
        &self.mixing
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.blur.lattice()
    }

    /// Pixel count `N`.
    pub fn n(&self) -> usize {
        self.lattice().len()
    }

    /// Difference-row count `M`.
    pub fn m(&self) -> usize {
        self.diff.rows()
    }

    pub fn latent_count(&self) -> usize {
        match self.prior.layout() {
            LatentLayout::PerRow => self.m(),
            LatentLayout::PerPixel => self.n(),
        }
    }

    /// Rows sharing one latent.
    pub fn rows_per_latent(&self) -> usize {
        match self.prior.layout() {
            LatentLayout::PerRow => 1,
            LatentLayout::PerPixel => self.diff.blocks(),
        }
    }

    pub fn latent_of_row(&self, row: usize) -> usize {
        match self.prior.layout() {
            LatentLayout::PerRow => row,
            LatentLayout::PerPixel => row % self.n(),
        }
    }

    /// Shape of the λ conditional, `M/2 + α_λ`.
    pub fn lambda_shape(&self) -> f64 {
        self.m() as f64 / 2.0 + self.hyper.alpha_lambda
    }

    /// Shape of the ν conditional, `N/2 + α_ν`.
    pub fn nu_shape(&self) -> f64 {
        self.n() as f64 / 2.0 + self.hyper.alpha_nu
    }

    /// GIG index of every latent conditional, `p − s/2`.
    pub fn latent_index(&self) -> f64 {
        self.mixing.p() - self.rows_per_latent() as f64 / 2.0
    }

    /// Per-row weights `R⁻² = 1 / (2 r_{ℓ(i)})`.
    pub fn row_weights(&self, r: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.m()];
        self.exec.fill(&mut w, |i| 0.5 / r[self.latent_of_row(i)]);
        w
    }

    /// Per-latent sums of squared differences `S_j = Σ_{ℓ(i)=j} (Dx)_i²`.
    pub fn latent_sums(&self, dx: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.latent_count()];
        let n = self.n();
        match self.prior.layout() {
            LatentLayout::PerRow => self.exec.fill(&mut s, |j| dx[j] * dx[j]),
            LatentLayout::PerPixel => {
                let blocks = self.diff.blocks();
                self.exec.fill(&mut s, |j| (0..blocks).map(|b| dx[b * n + j].powi(2)).sum())
            }
        }
        s
    }

    /// `GIG(a, λ S/2 + b, p − s/2)`: the conditional of one latent given its
    /// summed squared differences.
    pub fn latent_conditional(&self, index: usize, lambda: f64, sum_sq: f64) -> Result<GigParams, ModelError> {
        let b = 0.5 * lambda * sum_sq + self.mixing.b();
        if b == 0.0 {
            return Err(ModelError::DegenerateLatent { index });
        }
        GigParams::new(self.mixing.a(), b, self.latent_index()).map_err(|_| ModelError::DegenerateLatent { index })
    }

    pub(crate) fn check_data(&self, y: &[f64]) -> Result<(), ModelError> {
        if y.len() != self.n() {
            return Err(ModelError::Dimension { what: "data vector", expected: self.n(), found: y.len() });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { block: "data", value: y[i] });
        }
        Ok(())
    }
}

/// The unknowns `x, ν, λ, r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentState {
    pub x: Vec<f64>,
    pub nu: f64,
    pub lambda: f64,
    pub r: Vec<f64>,
}

impl LatentState {
    pub fn validate(&self, model: &ModelSpec) -> Result<(), ModelError> {
        if self.x.len() != model.n() {
            return Err(ModelError::Dimension { what: "x", expected: model.n(), found: self.x.len() });
        }
        if self.r.len() != model.latent_count() {
            return Err(ModelError::Dimension { what: "r", expected: model.latent_count(), found: self.r.len() });
        }
        if let Some(v) = self.x.iter().find(|v| !v.is_finite()) {
            return Err(ModelError::InvalidState { what: "x", value: *v });
        }
        for (what, v) in [("nu", self.nu), ("lambda", self.lambda)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidState { what, value: v });
            }
        }
        if let Some(v) = self.r.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(ModelError::InvalidState { what: "r", value: *v });
        }
        Ok(())
    }

    /// Data-driven start: `x = Hᵀy`, `r` at the mixing mean (the mode when
    /// the mean does not exist) and `λ = M / ‖R⁻¹Dx‖²`.
    ///
    /// `ν` comes from a robust noise estimate, `σ̂ = median|∇y| / (0.6745 √2)`
    /// over the periodic neighbour differences of the data. The residual
    /// `‖y − Hx‖²` at `x = Hᵀy` is dominated by the double blur rather than
    /// the noise, and starting from it drives 2-D runs into the
    /// over-smoothing collapse. `ν = N / ‖y − Hx‖²` is the fallback when the
    /// differences are mostly zero.
    pub fn initial(y: &[f64], model: &ModelSpec) -> Result<Self, ModelError> {
        model.check_data(y)?;
        let exec = model.exec();
        let x = model.blur().adjoint(y, exec)?;
        let mix = model.mixing();
        let r0 = match mix.mean() {
            Ok(m) => m,
            Err(_) => mix.mode(),
        };
        let r0 = if r0 > 0.0 && r0.is_finite() { r0 } else { 1.0 };
        let r = vec![r0; model.latent_count()];

        let hx = model.blur().apply(&x, exec)?;
        let res = exec.sum(y.len(), |i| (y[i] - hx[i]).powi(2));
        let scale = exec.norm_sq(y).max(f64::MIN_POSITIVE);
        let sigma = robust_noise_sigma(y, model.lattice(), exec)?;
        let nu = if sigma * sigma > 1e-24 * scale / model.n() as f64 {
            1.0 / (sigma * sigma)
        } else {
            model.n() as f64 / res.max(1e-12 * scale)
        };

        let dx = model.diff().apply(&x, exec)?;
        let pen = exec.sum(dx.len(), |i| dx[i] * dx[i]) / (2.0 * r0);
        let lambda = if pen > 1e-12 * scale / (2.0 * r0) { model.m() as f64 / pen } else { 1.0 };
        let state = LatentState { x, nu, lambda, r };
        state.validate(model)?;
        Ok(state)
    }
}

/// Median-absolute-difference noise scale of `y` on its lattice.
fn robust_noise_sigma(y: &[f64], lattice: LatticeSpec, exec: Exec) -> Result<f64, ModelError> {
    let dy = DiffOperator::periodic(lattice).apply(y, exec)?;
    let mut mags: Vec<f64> = dy.iter().map(|v| v.abs()).collect();
    let mid = mags.len() / 2;
    let (_, median, _) = mags.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*median / (0.674_489_75 * std::f64::consts::SQRT_2))
}
