use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tvbayes::estimators::{
    gibbs_run, ias_run, tikhonov_baseline, vb_run, GibbsOptions, IasOptions, TikhonovOptions, VbOptions, XSolver,
};
use tvbayes::harness::{metrics, write_columns_csv, Estimates, RunReport, SCHEMA_VERSION};
use tvbayes::model::DEFAULT_SAFEGUARD_B;
use tvbayes::{BlurOperator, DiffOperator, Exec, GigParams, HyperParams, ModelSpec, PriorVariant};

use crate::data::{self, Data};
use crate::exit::Usage;
use crate::simulate::PgmEncoding;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ias,
    Vb,
    Gibbs,
    Tikhonov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    /// Laplace TV with a small safeguard on the mixing density.
    Laplace,
    /// Student-t TV.
    Student,
    /// Isotropic 2-D Laplace TV, one latent per pixel.
    Laplace2d,
    /// Per-edge latents with the GIG given by --gig-a/--gig-b/--gig-p.
    Gig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Diff {
    Periodic,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Auto,
    Dense,
    Pcg,
}

impl From<Solver> for XSolver {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Auto => XSolver::Auto,
            Solver::Dense => XSolver::Dense,
            Solver::Pcg => XSolver::Pcg,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DeblurArgs {
    /// Observed data: single-column CSV (1-D), CSV table or PGM (2-D).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Ias)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Prior::Laplace)]
    pub prior: Prior,
    /// Odd blur kernel width; 1 means no blur.
    #[arg(long, default_value_t = 7)]
    pub kernel_size: usize,
    /// Kernel standard deviation in pixels; default width / 4.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Mixing `b` for the Laplace priors; 0 gives the exact Laplace.
    #[arg(long, default_value_t = DEFAULT_SAFEGUARD_B)]
    pub safeguard_b: f64,
    /// Student-t degrees of freedom.
    #[arg(long, default_value_t = 2.0)]
    pub dof: f64,
    #[arg(long, default_value_t = 2.0)]
    pub gig_a: f64,
    #[arg(long, default_value_t = DEFAULT_SAFEGUARD_B)]
    pub gig_b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gig_p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta_lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta_nu: f64,
    #[arg(long, value_enum, default_value_t = Diff::Periodic)]
    pub diff: Diff,
    /// IAS / VB stopping tolerance on the relative change of x.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub maxit: usize,
    #[arg(long, value_enum, default_value_t = Solver::Auto)]
    pub solver: Solver,
    #[arg(long, default_value_t = 1e-8)]
    pub pcg_tol: f64,
    /// PCG iteration cap; default ceil(10 sqrt N).
    #[arg(long)]
    pub pcg_maxit: Option<usize>,
    /// Fail when PCG hits its cap instead of keeping the last iterate.
    #[arg(long)]
    pub pcg_strict: bool,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Discarded sweeps; default 20% of --samples.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thinning: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tikhonov weight on ||Dx||^2.
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    /// Ground truth for error metrics.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value = "deblur")]
    pub out_prefix: String,
    #[arg(long, value_enum, default_value_t = PgmEncoding::Binary)]
    pub pgm: PgmEncoding,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl DeblurArgs {
    fn prior_variant(&self) -> Result<PriorVariant> {
        Ok(match self.prior {
            Prior::Laplace => PriorVariant::LaplaceTv { safeguard_b: self.safeguard_b },
            Prior::Student => PriorVariant::StudentTv { dof: self.dof },
            Prior::Laplace2d => PriorVariant::Laplace2d { mixing: GigParams::new(2.0, self.safeguard_b, 1.0)? },
            Prior::Gig => PriorVariant::CustomGig { mixing: GigParams::new(self.gig_a, self.gig_b, self.gig_p)? },
        })
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

struct Outcome {
    x: Vec<f64>,
    nu: f64,
    lambda: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<serde_json::Value>,
    trace_csv: Vec<(&'static str, Vec<f64>)>,
    extra: Vec<PathBuf>,
}

pub fn run(args: &DeblurArgs, out_dir: &Path) -> Result<()> {
    let y = data::load(&args.input)?;
    let truth = match &args.truth {
        Some(p) => {
            let t = data::load(p)?;
            if t.lattice != y.lattice {
                return Err(Usage(format!(
                    "truth is {}x{} but data is {}x{}",
                    t.lattice.rows(),
                    t.lattice.cols(),
                    y.lattice.rows(),
                    y.lattice.cols()
                ))
                .into());
            }
            Some(t)
        }
        None => None,
    };
    let exec = args.exec();
    let kernel = data::kernel(y.shape, args.kernel_size, args.sigma)?;
    let blur = BlurOperator::new(y.lattice, kernel);
    let diff = match args.diff {
        Diff::Periodic => DiffOperator::periodic(y.lattice),
        Diff::Identity => DiffOperator::identity(y.lattice),
    };
    let hyper = HyperParams::new(args.alpha_lambda, args.beta_lambda, args.alpha_nu, args.beta_nu)?;
    let prefix = data::resolve_prefix(out_dir, &args.out_prefix)?;

    let start = Instant::now();
    let outcome = match args.method {
        Method::Tikhonov => run_tikhonov(args, &y, &blur, &diff, exec)?,
        method => {
            let model = ModelSpec::new(blur, diff, hyper, args.prior_variant()?)?.with_exec(exec);
            match method {
                Method::Ias => run_ias(args, &y, &model)?,
                Method::Vb => run_vb(args, &y, &model, &prefix)?,
                _ => run_gibbs(args, &y, &model, &prefix)?,
            }
        }
    };
    let wall = start.elapsed().as_secs_f64();

    let fmt = args.pgm.into();
    let mut written = data::save(&prefix, "estimate", &y.with_values(outcome.x.clone()), fmt)?;
    written.extend(outcome.extra.iter().cloned());
    if !outcome.trace_csv.is_empty() {
        let path = data::sibling(&prefix, "trace.csv");
        let names: Vec<&str> = outcome.trace_csv.iter().map(|(n, _)| *n).collect();
        let cols: Vec<&[f64]> = outcome.trace_csv.iter().map(|(_, v)| v.as_slice()).collect();
        write_columns_csv(&path, &names, &cols)?;
        written.push(path);
    }

    let metrics = truth.as_ref().map(|t| metrics(&outcome.x, &t.values)).transpose()?;
    let mut config = serde_json::to_value(args)?;
    config["kernel_sigma_effective"] = json!(effective_sigma(args));
    config["pcg_maxit_effective"] = json!(args.pcg_maxit.unwrap_or(default_pcg_maxit(y.values.len())));
    config["burn_in_effective"] = json!(args.burn_in.unwrap_or(args.samples / 5));
    config["rows"] = json!(y.lattice.rows());
    config["cols"] = json!(y.lattice.cols());
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        estimator: serde_json::to_value(args.method)?.as_str().unwrap_or_default().to_string(),
        config,
        estimates: Estimates { x: outcome.x, nu: outcome.nu, lambda: outcome.lambda },
        iterations: outcome.iterations,
        converged: outcome.converged,
        trace: outcome.trace,
        metrics,
        wall_time_s: wall,
        seed: (args.method == Method::Gibbs).then_some(args.seed),
    };
    let report_path = data::sibling(&prefix, "report.json");
    report.write(&report_path)?;
    written.push(report_path);

    for p in &written {
        println!("{}", p.display());
    }
    if let Some(m) = &report.metrics {
        println!("rel_l2 {:.6} psnr {:.3}", m.rel_l2, m.psnr);
    }
    if !report.converged && matches!(args.method, Method::Ias | Method::Vb) {
        eprintln!("warning: stopped at --maxit {} before reaching --tol {}", args.maxit, args.tol);
    }
    Ok(())
}

fn effective_sigma(args: &DeblurArgs) -> Option<f64> {
    if args.kernel_size == 1 {
        None
    } else {
        Some(args.sigma.unwrap_or(args.kernel_size as f64 / 4.0))
    }
}

fn default_pcg_maxit(n: usize) -> usize {
    (10.0 * (n as f64).sqrt()).ceil() as usize
}

fn run_ias(args: &DeblurArgs, y: &Data, model: &ModelSpec) -> Result<Outcome> {
    let opts = IasOptions {
        tol: args.tol,
        maxit: args.maxit,
        solver: args.solver.into(),
        pcg_tol: args.pcg_tol,
        pcg_maxit: args.pcg_maxit,
        pcg_inexact: !args.pcg_strict,
        ..IasOptions::default()
    };
    let out = ias_run(&y.values, model, &opts).context("IAS")?;
    let col = |f: fn(&tvbayes::estimators::IasTraceEntry) -> f64| out.trace.iter().map(f).collect::<Vec<_>>();
    let trace_csv = vec![
        ("iteration", col(|e| e.iteration as f64)),
        ("log_posterior", col(|e| e.log_posterior)),
        ("rel_x_change", col(|e| e.rel_x_change)),
        ("nu", col(|e| e.nu)),
        ("lambda", col(|e| e.lambda)),
        ("pcg_iterations", col(|e| e.pcg_iterations as f64)),
        ("pcg_residual", col(|e| e.pcg_residual)),
    ];
    let trace = out.trace.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
    Ok(Outcome {
        nu: out.state.nu,
        lambda: out.state.lambda,
        x: out.state.x,
        iterations: out.iterations,
        converged: out.converged,
        trace,
        trace_csv,
        extra: Vec::new(),
    })
}

fn run_vb(args: &DeblurArgs, y: &Data, model: &ModelSpec, prefix: &Path) -> Result<Outcome> {
    let opts = VbOptions { tol: args.tol, maxit: args.maxit, init: None };
    let out = vb_run(&y.values, model, &opts).context("VB")?;
    let mut extra = data::save(prefix, "std", &y.with_values(out.marginal_std()), args.pgm.into())?;
    let factors = data::sibling(prefix, "factors.json");
    data::write_json(
        &factors,
        &json!({
            "nu": { "shape": out.nu_shape, "rate": out.nu_rate, "mean": out.nu_mean() },
            "lambda": { "shape": out.lambda_shape, "rate": out.lambda_rate, "mean": out.lambda_mean() },
        }),
    )?;
    extra.push(factors);
    let col = |f: fn(&tvbayes::estimators::VbTraceEntry) -> f64| out.trace.iter().map(f).collect::<Vec<_>>();
    let trace_csv = vec![
        ("iteration", col(|e| e.iteration as f64)),
        ("rel_x_change", col(|e| e.rel_x_change)),
        ("nu_mean", col(|e| e.nu_mean)),
        ("lambda_mean", col(|e| e.lambda_mean)),
    ];
    let trace = out.trace.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
    Ok(Outcome {
        nu: out.nu_mean(),
        lambda: out.lambda_mean(),
        x: out.x_mean,
        iterations: out.iterations,
        converged: out.converged,
        trace,
        trace_csv,
        extra,
    })
}

fn run_gibbs(args: &DeblurArgs, y: &Data, model: &ModelSpec, prefix: &Path) -> Result<Outcome> {
    let opts = GibbsOptions {
        seed: args.seed,
        samples: args.samples,
        burn_in: args.burn_in,
        thinning: args.thinning,
        ..GibbsOptions::default()
    };
    let chain = gibbs_run(&y.values, model, &opts).context("Gibbs")?;
    let mut extra = data::save(prefix, "std", &y.with_values(chain.x_std()), args.pgm.into())?;
    for (name, v) in [("nu", &chain.nu_trace), ("lambda", &chain.lambda_trace)] {
        let path = data::sibling(prefix, &format!("{name}_trace.csv"));
        write_columns_csv(&path, &[name], &[v.as_slice()])?;
        extra.push(path);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let trace = chain
        .nu_trace
        .iter()
        .zip(&chain.lambda_trace)
        .enumerate()
        .map(|(i, (nu, lambda))| json!({ "sample": i + 1, "nu": nu, "lambda": lambda }))
        .collect::<Vec<_>>();
    Ok(Outcome {
        nu: mean(&chain.nu_trace),
        lambda: mean(&chain.lambda_trace),
        x: chain.x_mean,
        iterations: trace.len(),
        converged: true,
        trace,
        trace_csv: Vec::new(),
        extra,
    })
}

/// The Tikhonov minimiser equals the MAP with fixed `λ/ν = δ`; the reported
/// `ν` is the inverse residual variance and `λ = δ ν`. One solve, so the
/// trace has a single row.
fn run_tikhonov(args: &DeblurArgs, y: &Data, blur: &BlurOperator, diff: &DiffOperator, exec: Exec) -> Result<Outcome> {
    let x = tikhonov_baseline(&y.values, blur, diff, args.delta, &TikhonovOptions::default(), exec)
        .context("Tikhonov")?;
    let hx = blur.apply(&x, exec)?;
    let rss: f64 = hx.iter().zip(&y.values).map(|(a, b)| (a - b).powi(2)).sum();
    let nu = if rss > 0.0 { y.values.len() as f64 / rss } else { f64::MAX };
    Ok(Outcome {
        x,
        nu,
        lambda: args.delta * nu,
        iterations: 1,
        converged: true,
        trace: vec![json!({ "iteration": 1, "rss": rss, "nu": nu, "lambda": args.delta * nu })],
        trace_csv: vec![
            ("iteration", vec![1.0]),
            ("rss", vec![rss]),
            ("nu", vec![nu]),
            ("lambda", vec![args.delta * nu]),
        ],
        extra: Vec::new(),
    })
}
