use super::HarnessError;
use rand::Rng;
use rand_distr::StandardNormal;

/// Unbiased sample variance.
pub fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Adds white Gaussian noise with `σ² = Var(blurred) / 10^(bsnr/10)`.
/// Returns the noisy vector and `σ`. An infinite BSNR adds nothing.
pub fn add_noise_bsnr<R: Rng + ?Sized>(
    blurred: &[f64],
    bsnr_db: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, f64), HarnessError> {
    if blurred.len() < 2 {
        return Err(HarnessError::Invalid("need at least two samples to define BSNR".into()));
    }
    if bsnr_db.is_nan() {
        return Err(HarnessError::Invalid("BSNR is NaN".into()));
    }
    let var = sample_variance(blurred);
    if !(var > 0.0) {
        return Err(HarnessError::Invalid("blurred signal is constant; BSNR undefined".into()));
    }
    let sigma = (var / 10f64.powf(bsnr_db / 10.0)).sqrt();
    if sigma == 0.0 {
        return Ok((blurred.to_vec(), 0.0));
    }
    let noisy = blurred.iter().map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    Ok((noisy, sigma))
}

/// `10 log₁₀(Var(blurred) / Var(noisy − blurred))`.
pub fn measured_bsnr(blurred: &[f64], noisy: &[f64]) -> f64 {
    let noise: Vec<f64> = noisy.iter().zip(blurred).map(|(a, b)| a - b).collect();
    10.0 * (sample_variance(blurred) / sample_variance(&noise)).log10()
}
