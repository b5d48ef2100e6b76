use super::HarnessError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Reconstruction quality against ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `‖x̂ − x‖ / ‖x‖`.
    pub rel_l2: f64,
    /// `10 log₁₀(peak² N / ‖x̂ − x‖²)` with `peak = max(x)`; `+∞` (written as
    /// the string `"inf"` in JSON) for a perfect reconstruction.
    #[serde(serialize_with = "ser_psnr", deserialize_with = "de_psnr")]
    pub psnr: f64,
}

fn ser_psnr<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_psnr<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid psnr '{s}'"))),
    }
}

pub fn metrics(x_hat: &[f64], x_true: &[f64]) -> Result<Metrics, HarnessError> {
    if x_hat.len() != x_true.len() || x_true.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "metrics need equal non-empty lengths, got {} and {}",
            x_hat.len(),
            x_true.len()
        )));
    }
    let err2: f64 = x_hat.iter().zip(x_true).map(|(a, b)| (a - b).powi(2)).sum();
    let ref2: f64 = x_true.iter().map(|v| v * v).sum();
    let peak = x_true.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let psnr = if err2 == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak * x_true.len() as f64 / err2).log10()
    };
    Ok(Metrics { rel_l2: (err2 / ref2).sqrt(), psnr })
}
