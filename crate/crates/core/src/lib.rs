//! Edge-preserving deblurring with a hierarchical Bayesian total-variation
//! model.
//!
//! The image prior is written as a Gaussian scale mixture over pixel
//! differences, with a generalized inverse Gaussian (GIG) mixing density on
//! each latent scale and gamma hyperpriors on the noise precision `nu` and the
//! penalty strength `lambda`. Three estimators share the model:
//!
//! * [`estimators::ias_run`] — MAP estimate by iterative alternating
//!   sequential coordinate ascent, matrix-free with PCG inner solves;
//! * [`estimators::vb_run`] — mean-field variational Bayes, giving an
//!   approximate posterior mean with uncertainty (dense, small problems);
//! * [`estimators::gibbs_run`] — systematic-scan Gibbs sampler used as the
//!   reference for posterior means.
//!
//! Data-parallel inner loops (convolutions, per-latent updates, dense
//! factorisation) run on rayon when the `parallel` feature is enabled and fall
//! back to plain iteration otherwise; both paths produce bitwise-identical
//! results.

pub mod distributions;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod model;
pub mod operators;
pub mod solvers;

pub use distributions::{DistError, GigParams};
pub use exec::Exec;
pub use model::{HyperParams, LatentState, ModelSpec, PriorVariant};
pub use operators::{BlurOperator, DiffOperator, Kernel, LatticeSpec};
