//! Estimator behaviour on small problems with independent reference values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tvbayes::distributions::DistError;
use tvbayes::estimators::*;
use tvbayes::solvers::SolverError;
use tvbayes::{
    BlurOperator, DiffOperator, Exec, GigParams, HyperParams, Kernel, LatentState, LatticeSpec, ModelSpec,
    PriorVariant,
};
use tvbayes_oracles::{self as oracle, SplitMix};

struct Problem {
    model: ModelSpec,
    y: Vec<f64>,
}

fn problem(k: usize, n: usize, kernel: usize, prior: PriorVariant, seed: u64) -> Problem {
    let l = LatticeSpec::new(k, n).unwrap();
    let kern = if k == 1 { Kernel::gaussian_1d(kernel, None) } else { Kernel::gaussian(kernel, None) }.unwrap();
    let h = BlurOperator::new(l, kern);
    let mut g = SplitMix::new(seed);
    // Blocky truth: a few random levels on contiguous stripes.
    let levels = g.vec(4, 0.0, 1.0);
    let truth: Vec<f64> = (0..l.len()).map(|p| levels[(p * 4) / l.len()]).collect();
    let hx = h.apply(&truth, Exec::Sequential).unwrap();
    let y = hx.iter().map(|v| v + 0.02 * g.normal()).collect();
    let model = ModelSpec::new(h, DiffOperator::periodic(l), HyperParams::default(), prior).unwrap();
    Problem { model, y }
}

fn dense_q(model: &ModelSpec, ratio: f64, weights: &[f64]) -> oracle::nalgebra::DMatrix<f64> {
    let h = model.blur();
    let d = model.diff();
    oracle::dense_from_linear_map(model.n(), |v| {
        let hv = h.gram_apply(v, Exec::Sequential).unwrap();
        let dv = d.apply(v, Exec::Sequential).unwrap();
        let wdv: Vec<f64> = dv.iter().zip(weights).map(|(a, w)| a * w).collect();
        let pen = d.apply_transpose(&wdv, Exec::Sequential).unwrap();
        hv.iter().zip(&pen).map(|(a, b)| a + ratio * b).collect()
    })
}

// IAS

#[test]
fn ias_identity_blur_small_lambda_reproduces_data() {
    let l = LatticeSpec::new(3, 3).unwrap();
    let model = ModelSpec::new(
        BlurOperator::identity(l),
        DiffOperator::periodic(l),
        HyperParams::default(),
        PriorVariant::default(),
    )
    .unwrap();
    let y = SplitMix::new(1).vec(9, 0.0, 1.0);
    let init = LatentState { x: vec![0.0; 9], nu: 1.0, lambda: 1e-10, r: vec![1.0; model.latent_count()] };
    let out = ias_run(&y, &model, &IasOptions { maxit: 1, init: Some(init), ..Default::default() }).unwrap();
    assert!(oracle::rel_dist(&out.state.x, &y) < 1e-9);
}

#[test]
fn ias_sub_updates_never_decrease_the_posterior() {
    let priors = [
        PriorVariant::default(),
        PriorVariant::StudentTv { dof: 2.0 },
        PriorVariant::Laplace2d { mixing: GigParams::new(2.0, 0.001, 1.0).unwrap() },
    ];
    for (i, prior) in priors.into_iter().enumerate() {
        let mut p = problem(6, 6, 3, prior, 40 + i as u64);
        // With 36 pixels the flat-prior posterior can run off to the constant
        // image; a proper prior on lambda keeps the mode finite.
        p.model = ModelSpec::new(
            p.model.blur().clone(),
            p.model.diff().clone(),
            HyperParams::new(1.0, 1e-2, 0.0, 0.0).unwrap(),
            prior,
        )
        .unwrap();
        let opts = IasOptions { maxit: 15, record_sub_updates: true, ..Default::default() };
        let out = ias_run(&p.y, &p.model, &opts).unwrap_or_else(|e| panic!("{prior:?}: {e}"));
        let t = &out.sub_update_trace;
        assert_eq!(t.len(), 1 + 4 * out.iterations);
        for w in t.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs().max(1.0), "{prior:?}: {} -> {}", w[0], w[1]);
        }
        for e in &out.trace {
            assert_eq!(e.pcg_iterations, 0, "36 unknowns use the dense path");
        }
    }
}

#[test]
fn ias_pcg_and_dense_paths_agree() {
    let p = problem(8, 8, 3, PriorVariant::default(), 5);
    let dense = ias_run(&p.y, &p.model, &IasOptions { solver: XSolver::Dense, maxit: 10, ..Default::default() }).unwrap();
    let pcg = ias_run(
        &p.y,
        &p.model,
        &IasOptions { solver: XSolver::Pcg, maxit: 10, pcg_tol: 1e-12, pcg_maxit: Some(5000), ..Default::default() },
    )
    .unwrap();
    assert!(oracle::rel_dist(&pcg.state.x, &dense.state.x) < 1e-7);
    assert!(pcg.trace.iter().all(|t| t.pcg_iterations > 0 && t.pcg_residual <= 1e-12));
}

#[test]
fn ias_terminates_at_conditional_modes() {
    let p = problem(1, 48, 5, PriorVariant::default(), 6);
    let tol = 1e-8;
    let out = ias_run(&p.y, &p.model, &IasOptions { tol, maxit: 2000, ..Default::default() }).unwrap();
    assert!(out.converged);
    let fp = fixed_point_residual(&out.state, &p.y, &p.model).unwrap();
    assert!(fp.max() < 100.0 * tol, "{fp:?}");
}

#[test]
fn ias_strict_pcg_reports_non_convergence() {
    let p = problem(8, 8, 5, PriorVariant::default(), 7);
    let opts =
        IasOptions { solver: XSolver::Pcg, pcg_maxit: Some(1), pcg_tol: 1e-14, pcg_inexact: false, ..Default::default() };
    match ias_run(&p.y, &p.model, &opts) {
        Err(EstimatorError::Solver(SolverError::NotConverged { iterations: 1, .. })) => {}
        other => panic!("{other:?}"),
    }
    // The inexact default keeps going and still ascends.
    let opts = IasOptions { solver: XSolver::Pcg, pcg_maxit: Some(3), maxit: 5, record_sub_updates: true, ..Default::default() };
    let out = ias_run(&p.y, &p.model, &opts).unwrap();
    for w in out.sub_update_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-8 * w[0].abs());
    }
}

#[test]
fn exact_laplace_degeneracy_is_typed() {
    // A constant signal leaves every difference at zero: the exact-Laplace
    // latent conditional loses its b parameter.
    let l = LatticeSpec::line(16).unwrap();
    let model = ModelSpec::new(
        BlurOperator::identity(l),
        DiffOperator::periodic(l),
        HyperParams::default(),
        PriorVariant::LaplaceTv { safeguard_b: 0.0 },
    )
    .unwrap();
    let init = LatentState { x: vec![0.5; 16], nu: 1.0, lambda: 1.0, r: vec![1.0; 16] };
    let err = draw_latents(&init, &model, 3).unwrap_err();
    assert!(err.to_string().contains("safeguard"), "{err}");
}

// VB

#[test]
fn rig_inverse_moment_identity() {
    // GIG(2, λE/2, ½): E(1/r) = 2/√(λE), since K_{-1/2} = K_{1/2}.
    let mut t = -6.0;
    while t <= 6.0 {
        let le = 10f64.powf(t);
        let g = GigParams::new(2.0, le / 2.0, 0.5).unwrap();
        let closed = 2.0 / le.sqrt();
        assert!((g.moment(-1.0).unwrap() / closed - 1.0).abs() < 1e-10, "λE = {le}");
        t += 0.25;
    }
}

#[test]
fn vb_gamma_factors_match_their_closed_forms() {
    let p = problem(1, 24, 5, PriorVariant::default(), 8);
    let out = vb_run(&p.y, &p.model, &VbOptions::default()).unwrap();
    assert!(out.converged);
    let n = p.model.n() as f64;
    assert_eq!(out.nu_shape, n / 2.0);
    assert_eq!(out.lambda_shape, p.model.m() as f64 / 2.0);
    // ν rate from x̂ and C, recomputed densely.
    let hth = dense_q(&p.model, 0.0, &vec![0.0; p.model.m()]);
    let hx = p.model.blur().apply(&out.x_mean, Exec::Sequential).unwrap();
    let res: f64 = p.y.iter().zip(&hx).map(|(a, b)| (a - b).powi(2)).sum();
    let mut tr = 0.0;
    for i in 0..p.model.n() {
        for j in 0..p.model.n() {
            tr += out.cov.get(i, j) * hth[(j, i)];
        }
    }
    assert!((out.nu_rate / (0.5 * res + 0.5 * tr) - 1.0).abs() < 1e-10);
    // With an exact point mass for x the gamma mean is N / residual.
    let nu_point = (n / 2.0) / (0.5 * res);
    assert!((nu_point - n / res).abs() < 1e-12 * nu_point);
    // E(1/r) cached from the GIG factors.
    for (g, e) in out.r.iter().zip(&out.e_inv_r) {
        assert!((g.moment(-1.0).unwrap() / e - 1.0).abs() < 1e-14);
        assert!(*e > 0.0 && e.is_finite());
    }
    // Covariance is SPD.
    let c = oracle::nalgebra::DMatrix::from_fn(p.model.n(), p.model.n(), |i, j| out.cov.get(i, j));
    assert!(c.symmetric_eigen().eigenvalues.iter().all(|v| *v > 0.0));
}

#[test]
fn vb_extra_cycle_is_idempotent() {
    let p = problem(1, 24, 5, PriorVariant::default(), 9);
    let tol = 1e-7;
    let a = vb_run(&p.y, &p.model, &VbOptions { tol, ..Default::default() }).unwrap();
    assert!(a.converged);
    let b = vb_run(&p.y, &p.model, &VbOptions { tol: 1e-300, maxit: a.iterations + 1, ..Default::default() }).unwrap();
    assert_eq!(b.iterations, a.iterations + 1);
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    assert!(oracle::rel_dist(&b.x_mean, &a.x_mean) < 10.0 * tol);
    assert!(rel(b.nu_rate, a.nu_rate) < 10.0 * tol);
    assert!(rel(b.lambda_rate, a.lambda_rate) < 10.0 * tol);
    for (ga, gb) in a.r.iter().zip(&b.r) {
        assert!(rel(gb.b(), ga.b()) < 10.0 * tol);
    }
}

#[test]
fn dense_estimators_refuse_large_lattices() {
    let l = LatticeSpec::new(70, 70).unwrap();
    let model = ModelSpec::new(
        BlurOperator::new(l, Kernel::gaussian(3, None).unwrap()),
        DiffOperator::periodic(l),
        HyperParams::default(),
        PriorVariant::default(),
    )
    .unwrap();
    let y = SplitMix::new(2).vec(l.len(), 0.0, 1.0);
    assert!(matches!(vb_run(&y, &model, &VbOptions::default()), Err(EstimatorError::Solver(SolverError::Capacity { .. }))));
    assert!(matches!(
        gibbs_run(&y, &model, &GibbsOptions::default()),
        Err(EstimatorError::Solver(SolverError::Capacity { .. }))
    ));
}

// Gibbs

#[test]
fn gibbs_is_reproducible_and_seed_sensitive() {
    let p = problem(1, 16, 3, PriorVariant::default(), 10);
    let opts = GibbsOptions { seed: 77, samples: 200, ..Default::default() };
    let a = gibbs_run(&p.y, &p.model, &opts).unwrap();
    let b = gibbs_run(&p.y, &p.model, &opts).unwrap();
    assert_eq!(a.x_mean, b.x_mean);
    assert_eq!(a.lambda_trace, b.lambda_trace);
    let seq = gibbs_run(&p.y, &p.model.clone().with_exec(Exec::Sequential), &opts).unwrap();
    assert_eq!(a.nu_trace, seq.nu_trace);
    let c = gibbs_run(&p.y, &p.model, &GibbsOptions { seed: 78, ..opts }).unwrap();
    assert_ne!(a.nu_trace, c.nu_trace);
    assert_eq!(a.burn_in, 40);
    assert_eq!(a.kept, 200);
    assert_eq!(a.nu_trace.len(), 200);
}

#[test]
fn gibbs_running_moments_match_two_pass() {
    let p = problem(1, 12, 3, PriorVariant::default(), 11);
    let lasts: Vec<Vec<f64>> = (1..=5)
        .map(|k| {
            let o = GibbsOptions { seed: 5, samples: k, burn_in: Some(3), thinning: 2, ..Default::default() };
            gibbs_run(&p.y, &p.model, &o).unwrap().last.x
        })
        .collect();
    let o = GibbsOptions { seed: 5, samples: 5, burn_in: Some(3), thinning: 2, ..Default::default() };
    let chain = gibbs_run(&p.y, &p.model, &o).unwrap();
    for i in 0..p.model.n() {
        let col: Vec<f64> = lasts.iter().map(|x| x[i]).collect();
        assert!((chain.x_mean[i] - oracle::mean(&col)).abs() < 1e-12);
        assert!((chain.x_var[i] - oracle::variance(&col)).abs() < 1e-12 * oracle::variance(&col).max(1e-12));
    }
    let one = gibbs_run(&p.y, &p.model, &GibbsOptions { seed: 5, samples: 1, ..Default::default() }).unwrap();
    assert!(one.x_var.iter().all(|v| *v == 0.0));
}

#[test]
fn gibbs_gamma_conditionals_have_their_moments() {
    let p = problem(1, 20, 3, PriorVariant::default(), 12);
    let mut state = LatentState::initial(&p.y, &p.model).unwrap();
    state.r = SplitMix::new(3).vec(p.model.latent_count(), 0.2, 2.0);
    let hx = p.model.blur().apply(&state.x, Exec::Sequential).unwrap();
    let res: f64 = p.y.iter().zip(&hx).map(|(a, b)| (a - b).powi(2)).sum();
    let dx = p.model.diff().apply(&state.x, Exec::Sequential).unwrap();
    let pen: f64 = dx.iter().zip(&state.r).map(|(d, r)| d * d / (2.0 * r)).sum();
    let n = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let nus: Vec<f64> = (0..n).map(|_| draw_nu(&state, &p.y, &p.model, &mut rng).unwrap()).collect();
    let lams: Vec<f64> = (0..n).map(|_| draw_lambda(&state, &p.model, &mut rng).unwrap()).collect();
    for (draws, shape, rate) in [(&nus, 10.0, 0.5 * res), (&lams, 10.0, 0.5 * pen)] {
        let (m, v) = (shape / rate, shape / (rate * rate));
        let se = (v / n as f64).sqrt();
        assert!((oracle::mean(draws) - m).abs() < 4.0 * se);
        assert!((oracle::variance(draws) / v - 1.0).abs() < 0.05);
    }
}

#[test]
fn gibbs_lambda_trace_split_halves_agree() {
    let p = problem(1, 32, 5, PriorVariant::default(), 13);
    let chain = gibbs_run(&p.y, &p.model, &GibbsOptions { seed: 21, samples: 4000, ..Default::default() }).unwrap();
    let (a, b) = chain.lambda_trace.split_at(2000);
    // Batch means absorb the autocorrelation.
    let batch_se = |v: &[f64]| {
        let means: Vec<f64> = v.chunks(100).map(oracle::mean).collect();
        (oracle::variance(&means) / means.len() as f64).sqrt()
    };
    let se = (batch_se(a).powi(2) + batch_se(b).powi(2)).sqrt();
    assert!((oracle::mean(a) - oracle::mean(b)).abs() < 3.0 * se, "{} vs {} (se {se})", oracle::mean(a), oracle::mean(b));
}

#[test]
fn gibbs_sharp_likelihood_mean_tends_to_data() {
    let l = LatticeSpec::line(10).unwrap();
    let model = ModelSpec::new(
        BlurOperator::identity(l),
        DiffOperator::periodic(l),
        HyperParams::default(),
        PriorVariant::default(),
    )
    .unwrap();
    let y = SplitMix::new(14).vec(10, 0.0, 1.0);
    let init = LatentState { x: y.clone(), nu: 1e8, lambda: 1e-6, r: vec![1.0; 10] };
    let opts = GibbsOptions {
        seed: 2,
        samples: 2000,
        init: Some(init),
        freeze_nu: true,
        freeze_lambda: true,
        ..Default::default()
    };
    let chain = gibbs_run(&y, &model, &opts).unwrap();
    // Posterior sd ≈ 1e-4, so the mean of 2000 draws sits within ~1e-5.
    for (m, v) in chain.x_mean.iter().zip(&y) {
        assert!((m - v).abs() < 2e-5);
    }
    assert!(chain.nu_trace.iter().all(|v| *v == 1e8));
}

#[test]
fn gibbs_rejects_bad_options() {
    let p = problem(1, 8, 3, PriorVariant::default(), 15);
    assert!(gibbs_run(&p.y, &p.model, &GibbsOptions { samples: 0, ..Default::default() }).is_err());
    assert!(gibbs_run(&p.y, &p.model, &GibbsOptions { thinning: 0, ..Default::default() }).is_err());
}

// Tikhonov

#[test]
fn tikhonov_matches_dense_normal_equations() {
    for (seed, k, n) in [(1u64, 1usize, 30usize), (2, 5, 6), (3, 7, 4)] {
        let p = problem(k, n, 3, PriorVariant::default(), seed);
        let delta = 0.05 * seed as f64;
        let x = tikhonov_baseline(&p.y, p.model.blur(), p.model.diff(), delta, &TikhonovOptions::default(), Exec::Parallel)
            .unwrap();
        let a = dense_q(&p.model, delta, &vec![1.0; p.model.m()]);
        let rhs = p.model.blur().adjoint(&p.y, Exec::Sequential).unwrap();
        let reference = oracle::dense_solve(&a, &rhs);
        assert!(oracle::rel_dist(&x, &reference) < 1e-8);
    }
}

#[test]
fn tikhonov_limits() {
    let l = LatticeSpec::line(40).unwrap();
    let d = DiffOperator::periodic(l);
    let y = SplitMix::new(16).vec(40, 0.0, 1.0);
    let x = tikhonov_baseline(&y, &BlurOperator::identity(l), &d, 1e-9, &TikhonovOptions::default(), Exec::Sequential)
        .unwrap();
    assert!(oracle::rel_dist(&x, &y) < 1e-7);
    // Heavy penalty: the best constant fit, the mean of y for a unit-sum kernel.
    let h = BlurOperator::new(l, Kernel::gaussian_1d(5, None).unwrap());
    // Condition number grows with delta, so the default 1e-10 residual is below
    // the rounding floor here.
    let stiff = TikhonovOptions { tol: 1e-6, ..Default::default() };
    let x = tikhonov_baseline(&y, &h, &d, 1e9, &stiff, Exec::Sequential).unwrap();
    let mean = oracle::mean(&y);
    assert!(x.iter().all(|v| (v - mean).abs() < 1e-6), "{:?}", &x[..3]);
    assert!(matches!(
        tikhonov_baseline(&y, &h, &d, 0.0, &TikhonovOptions::default(), Exec::Sequential),
        Err(EstimatorError::Options(_))
    ));
}

#[test]
fn divergent_moment_is_an_error_not_infinity() {
    // Gamma(1, ·) has no E(1/r).
    let g = GigParams::new(2.0, 0.0, 1.0).unwrap();
    assert!(matches!(g.moment(-1.0), Err(DistError::MomentDiverges { .. })));
}
