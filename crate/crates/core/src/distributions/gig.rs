//! Generalized inverse Gaussian distribution `GIG(a, b, p)` with density
//! proportional to `x^{p−1} exp(−(a x + b/x)/2)` on `x > 0`.

use super::bessel::ln_bessel_k;
use super::DistError;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGig", into = "RawGig")]
pub struct GigParams {
    a: f64,
    b: f64,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGig {
    a: f64,
    b: f64,
    p: f64,
}

impl TryFrom<RawGig> for GigParams {
    type Error = DistError;
    fn try_from(r: RawGig) -> Result<Self, DistError> {
        GigParams::new(r.a, r.b, r.p)
    }
}

impl From<GigParams> for RawGig {
    fn from(g: GigParams) -> Self {
        RawGig { a: g.a, b: g.b, p: g.p }
    }
}

/// Named reductions of the GIG family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpecialCase {
    /// Rate `theta`.
    Exponential { theta: f64 },
    /// Shape `alpha`, rate `beta`.
    Gamma { alpha: f64, beta: f64 },
    /// Shape `alpha`, scale `beta`.
    InvGamma { alpha: f64, beta: f64 },
    /// Reciprocal inverse Gaussian: `a = α²/β`, `b = β`, `p = ½`.
    Rig { alpha: f64, beta: f64 },
    Generic,
}

impl GigParams {
    /// Admissible region:
    /// `(a>0, b≥0, p>0)`, `(a>0, b>0, p=0)` or `(a≥0, b>0, p<0)`.
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self, DistError> {
        let finite = a.is_finite() && b.is_finite() && p.is_finite();
        let ok = finite
            && a >= 0.0
            && b >= 0.0
            && ((a > 0.0 && b > 0.0) || (a > 0.0 && b == 0.0 && p > 0.0) || (a == 0.0 && b > 0.0 && p < 0.0));
        if ok {
            Ok(GigParams { a, b, p })
        } else {
            Err(DistError::Inadmissible { a, b, p })
        }
    }

    /// `Exp(θ) = GIG(2θ, 0, 1)`.
    pub fn exponential(theta: f64) -> Result<Self, DistError> {
        Self::new(2.0 * theta, 0.0, 1.0)
    }

    /// `Gam(α, β) = GIG(2β, 0, α)` (rate parameterisation).
    pub fn gamma(alpha: f64, beta: f64) -> Result<Self, DistError> {
        Self::new(2.0 * beta, 0.0, alpha)
    }

    /// `InvGam(α, β) = GIG(0, 2β, −α)`.
    pub fn inv_gamma(alpha: f64, beta: f64) -> Result<Self, DistError> {
        Self::new(0.0, 2.0 * beta, -alpha)
    }

    /// `RIG(α, β) = GIG(α²/β, β, ½)`.
    pub fn rig(alpha: f64, beta: f64) -> Result<Self, DistError> {
        Self::new(alpha * alpha / beta, beta, 0.5)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn special_case(&self) -> SpecialCase {
        if self.b == 0.0 {
            if self.p == 1.0 {
                SpecialCase::Exponential { theta: self.a / 2.0 }
            } else {
                SpecialCase::Gamma { alpha: self.p, beta: self.a / 2.0 }
            }
        } else if self.a == 0.0 {
            SpecialCase::InvGamma { alpha: -self.p, beta: self.b / 2.0 }
        } else if self.p == 0.5 {
            SpecialCase::Rig { alpha: (self.a * self.b).sqrt(), beta: self.b }
        } else {
            SpecialCase::Generic
        }
    }

    /// `√(ab)`, the Bessel argument.
    fn omega(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// Log of the normalising constant `C` in `C x^{p−1} e^{−(ax + b/x)/2}`.
    pub fn log_normalizer(&self) -> Result<f64, DistError> {
        if self.b == 0.0 {
            // Gamma(p, a/2)
            let beta = self.a / 2.0;
            Ok(self.p * beta.ln() - ln_gamma(self.p))
        } else if self.a == 0.0 {
            // InvGamma(−p, b/2)
            let alpha = -self.p;
            let beta = self.b / 2.0;
            Ok(alpha * beta.ln() - ln_gamma(alpha))
        } else {
            Ok(0.5 * self.p * (self.a / self.b).ln()
                - std::f64::consts::LN_2
                - ln_bessel_k(self.p, self.omega())?)
        }
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64, DistError> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(DistError::Domain { what: "GIG support", value: x });
        }
        Ok(self.log_normalizer()? + self.log_kernel(x))
    }

    /// Unnormalised log density.
    pub fn log_kernel(&self, x: f64) -> f64 {
        (self.p - 1.0) * x.ln() - 0.5 * (self.a * x + self.b / x)
    }

    /// `E(x^q)`.
    pub fn moment(&self, q: f64) -> Result<f64, DistError> {
        if q == 0.0 {
            return Ok(1.0);
        }
        let diverges = DistError::MomentDiverges { q, a: self.a, b: self.b, p: self.p };
        let ln = if self.b == 0.0 {
            let (alpha, beta) = (self.p, self.a / 2.0);
            if alpha + q <= 0.0 {
                return Err(diverges);
            }
            ln_gamma(alpha + q) - ln_gamma(alpha) - q * beta.ln()
        } else if self.a == 0.0 {
            let (alpha, beta) = (-self.p, self.b / 2.0);
            if alpha - q <= 0.0 {
                return Err(diverges);
            }
            ln_gamma(alpha - q) - ln_gamma(alpha) + q * beta.ln()
        } else {
            let w = self.omega();
            0.5 * q * (self.b / self.a).ln() + ln_bessel_k(self.p + q, w)? - ln_bessel_k(self.p, w)?
        };
        let v = ln.exp();
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(DistError::NonFinite { what: "GIG moment", value: v })
        }
    }

    pub fn mean(&self) -> Result<f64, DistError> {
        self.moment(1.0)
    }

    pub fn mode(&self) -> f64 {
        let (a, b, pm1) = (self.a, self.b, self.p - 1.0);
        if a > 0.0 {
            let root = (pm1 * pm1 + a * b).sqrt();
            if pm1 >= 0.0 {
                (pm1 + root) / a
            } else {
                // Same value, rewritten to avoid cancellation.
                b / (root - pm1)
            }
        } else {
            b / (2.0 * (1.0 - self.p))
        }
    }

    pub fn variance(&self) -> Result<f64, DistError> {
        let diverges = DistError::MomentDiverges { q: 2.0, a: self.a, b: self.b, p: self.p };
        let v = if self.b == 0.0 {
            let (alpha, beta) = (self.p, self.a / 2.0);
            alpha / (beta * beta)
        } else if self.a == 0.0 {
            let (alpha, beta) = (-self.p, self.b / 2.0);
            if alpha <= 2.0 {
                return Err(diverges);
            }
            beta * beta / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0))
        } else {
            let w = self.omega();
            let k0 = ln_bessel_k(self.p, w)?;
            let r1 = (ln_bessel_k(self.p + 1.0, w)? - k0).exp();
            let r2 = (ln_bessel_k(self.p + 2.0, w)? - k0).exp();
            (self.b / self.a) * (r2 - r1 * r1)
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(DistError::NonFinite { what: "GIG variance", value: v })
        }
    }
}
