use super::SolverError;
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcgOptions {
    /// Relative residual target `‖A x − b‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl PcgOptions {
    /// Defaults: `tol = 1e-8`, `max_iter = ⌈10 √n⌉`.
    pub fn for_dimension(n: usize) -> Self {
        PcgOptions { tol: 1e-8, max_iter: (10.0 * (n as f64).sqrt()).ceil() as usize }
    }
}

#[derive(Clone, Debug)]
pub enum Preconditioner {
    Identity,
    /// Multiply by the stored inverse diagonal.
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    /// Jacobi preconditioner from the diagonal of the operator.
    pub fn jacobi(diag: &[f64]) -> Self {
        Preconditioner::Jacobi(diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect())
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(r),
            Preconditioner::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// True (recomputed) relative residual of `x`.
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradients for an SPD operator given as a matvec.
///
/// Convergence is declared only after the recursively updated residual and
/// the explicitly recomputed residual both satisfy `tol`; if they disagree the
/// iteration restarts from the true residual.
pub fn pcg_solve<A>(
    mut matvec: A,
    rhs: &[f64],
    precond: &Preconditioner,
    x0: Option<&[f64]>,
    opts: &PcgOptions,
    exec: Exec,
) -> Result<PcgOutcome, SolverError>
where
    A: FnMut(&[f64]) -> Vec<f64>,
{
    let n = rhs.len();
    let b_norm = exec.norm_sq(rhs).sqrt();
    if b_norm == 0.0 {
        return Ok(PcgOutcome { x: vec![0.0; n], iterations: 0, rel_residual: 0.0 });
    }
    let mut x = match x0 {
        Some(v) if v.len() == n => v.to_vec(),
        Some(v) => return Err(SolverError::DimensionMismatch { expected: n, found: v.len() }),
        None => vec![0.0; n],
    };
    let residual_of = |x: &[f64], matvec: &mut A| -> Vec<f64> {
        let ax = matvec(x);
        rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
    };
    let mut r = residual_of(&x, &mut matvec);
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = exec.dot(&r, &z);
    let mut iterations = 0;

    loop {
        let rel = exec.norm_sq(&r).sqrt() / b_norm;
        if rel <= opts.tol {
            let r_true = residual_of(&x, &mut matvec);
            let rel_true = exec.norm_sq(&r_true).sqrt() / b_norm;
            if rel_true <= opts.tol {
                return Ok(PcgOutcome { x, iterations, rel_residual: rel_true });
            }
            r = r_true;
            precond.apply(&r, &mut z);
            p.copy_from_slice(&z);
            rz = exec.dot(&r, &z);
        }
        if iterations >= opts.max_iter {
            let r_last = residual_of(&x, &mut matvec);
            let residual = exec.norm_sq(&r_last).sqrt() / b_norm;
            return Err(SolverError::NotConverged { iterations, residual, last: x });
        }
        let ap = matvec(&p);
        let pap = exec.dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(SolverError::Breakdown { iteration: iterations });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond.apply(&r, &mut z);
        let rz_new = exec.dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
}
