//! GIG family, Laplace densities and Gaussian scale mixtures.

mod bessel;
mod gig;
mod laplace;
mod sampling;

pub use bessel::{bessel_k, ln_bessel_k};
pub use gig::{GigParams, SpecialCase};
pub use laplace::{gsm_sample, gsm_sample_factored, laplace1d_log_pdf, MvLaplaceParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("GIG parameters (a={a}, b={b}, p={p}) are outside the admissible region")]
    Inadmissible { a: f64, b: f64, p: f64 },
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("moment E(x^{q}) diverges for GIG(a={a}, b={b}, p={p})")]
    MomentDiverges { q: f64, a: f64, b: f64, p: f64 },
    #[error("K_{nu}({x}) is not representable in linear scale (ln K = {ln_value}); use the log-domain value")]
    BesselRange { nu: f64, x: f64, ln_value: f64 },
    #[error("{what} is not finite: {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("scale matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}
