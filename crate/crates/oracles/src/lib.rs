//! Reference computations used only by test suites.
//!
//! Nothing here shares code with the `tvbayes` implementation: integrals are
//! computed by adaptive Gauss-Kronrod quadrature, dense linear algebra goes
//! through nalgebra, and distribution checks use plain empirical statistics.

pub use nalgebra;
use nalgebra::{DMatrix, DVector};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    parts.push((a, b, v, e));
    for _ in 0..20_000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // Sum smallest first.
    let mut vals: Vec<f64> = parts.iter().map(|p| p.2).collect();
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    vals.iter().sum()
}

/// Log of `∫_0^∞ exp(log_f(x)) dx` for a positive, unimodal-ish integrand.
///
/// Substitutes `x = e^t`, locates the peak on a coarse grid and integrates the
/// shifted integrand so nothing overflows.
pub fn log_integrate_positive_half_line<F: Fn(f64) -> f64>(log_f: F) -> f64 {
    let g = |t: f64| log_f(t.exp()) + t;
    let (lo, hi) = (-745.0f64, 709.0f64);
    let mut peak = f64::NEG_INFINITY;
    let mut t = lo;
    while t <= hi {
        let v = g(t);
        if v.is_finite() && v > peak {
            peak = v;
        }
        t += 0.05;
    }
    // Trim to the region where the integrand is not negligible.
    let cutoff = peak - 80.0;
    let mut a = lo;
    while a < hi && !(g(a) > cutoff) {
        a += 0.05;
    }
    let mut b = hi;
    while b > a && !(g(b) > cutoff) {
        b -= 0.05;
    }
    let (a, b) = (a - 0.5, b + 0.5);
    let val = integrate(
        |t| {
            let v = g(t) - peak;
            if v.is_finite() { v.exp() } else { 0.0 }
        },
        a,
        b,
        1e-14,
        0.0,
    );
    peak + val.ln()
}

/// `K_p(x)` from the integral representation `∫_0^∞ e^{-x cosh t} cosh(pt) dt`,
/// returned as a logarithm.
pub fn ln_bessel_k_quadrature(p: f64, x: f64) -> f64 {
    let p = p.abs();
    let g = |t: f64| {
        // ln cosh(pt) computed stably
        let pt = p * t;
        let lncosh = pt + (-2.0 * pt).exp().ln_1p() - std::f64::consts::LN_2;
        -x * (t.cosh() - 1.0) + lncosh
    };
    let mut peak = f64::NEG_INFINITY;
    let mut t = 0.0;
    let mut last_finite = 0.0;
    while t < 800.0 {
        let v = g(t);
        if v.is_finite() {
            peak = peak.max(v);
            last_finite = t;
        }
        t += 0.01;
    }
    let mut b = last_finite;
    while b > 0.0 && g(b) < peak - 80.0 {
        b -= 0.01;
    }
    let b = b + 0.1;
    let val = integrate(|t| (g(t) - peak).exp(), 0.0, b, 1e-14, 0.0);
    -x + peak + val.ln()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic one-sample KS critical value `sqrt(-ln(alpha/2)/2)/sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Dense matrix built column by column from a linear map.
pub fn dense_from_linear_map<F: Fn(&[f64]) -> Vec<f64>>(n: usize, f: F) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = f(&e);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let lu = a.clone().lu();
    lu.solve(&DVector::from_column_slice(b))
        .expect("singular matrix")
        .iter()
        .copied()
        .collect()
}

pub fn dense_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().try_inverse().expect("singular matrix")
}

/// Log-determinant as the sum of log eigenvalues of a symmetric matrix.
pub fn log_det_eigen(a: &DMatrix<f64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().map(|l| l.ln()).sum()
}

pub fn matvec(a: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (a * DVector::from_column_slice(v)).iter().copied().collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_dist(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b)
}

/// Deterministic pseudo-random numbers for building test fixtures without
/// pulling the implementation's RNG plumbing in (SplitMix64).
#[derive(Clone, Debug)]
pub struct SplitMix(u64);

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn vec(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.range(lo, hi)).collect()
    }

    /// Random symmetric positive-definite matrix `A Aᵀ + n I`.
    pub fn spd(&mut self, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| self.range(-1.0, 1.0));
        &a * a.transpose() + DMatrix::identity(n, n) * (n as f64) * 0.1
    }
}
