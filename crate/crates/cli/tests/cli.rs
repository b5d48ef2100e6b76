use std::path::Path;
use std::process::{Command, Output};
use tvbayes::harness::{read_columns_csv, read_pgm, read_signal_csv, RunReport};

fn tvbayes(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvbayes"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn simulate_blocky(dir: &Path, seed: &str) {
    ok(&tvbayes(dir, &["simulate", "--kind", "blocky", "--size", "100", "--bsnr", "30", "--seed", seed]));
}

#[test]
fn simulate_writes_three_tables_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&tvbayes(dir.path(), &["simulate", "--kind", "blocky", "--size", "100", "--bsnr", "30"]));
    for name in ["sim_truth.csv", "sim_blurred.csv", "sim_noisy.csv", "sim_sim.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
        assert!(stdout.contains(name));
    }
    for name in ["truth", "blurred", "noisy"] {
        assert_eq!(read_signal_csv(&dir.path().join(format!("sim_{name}.csv"))).unwrap().len(), 100);
    }
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim_sim.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "blocky");
    assert_eq!(side["seed"], 0);
    assert_eq!(side["bsnr_db"], 30.0);
    assert!(side["noise_sigma"].as_f64().unwrap() > 0.0);
    let kernel = side["kernel"].to_string();
    assert!(!kernel.is_empty());
}

#[test]
fn unit_kernel_leaves_truth_unblurred() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tvbayes(dir.path(), &["simulate", "--kind", "blocky_smooth", "--kernel-size", "1"]));
    let truth = read_signal_csv(&dir.path().join("sim_truth.csv")).unwrap();
    let blurred = read_signal_csv(&dir.path().join("sim_blurred.csv")).unwrap();
    assert_eq!(truth, blurred);
}

#[test]
fn shepp_logan_images_are_200_square() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tvbayes(dir.path(), &["simulate", "--kind", "shepp_logan", "--size", "200", "--kernel-size", "7"]));
    for name in ["truth", "blurred", "noisy"] {
        let img = read_pgm(&dir.path().join(format!("sim_{name}.pgm"))).unwrap();
        assert_eq!((img.width, img.height), (200, 200));
        let cols = read_columns_csv(&dir.path().join(format!("sim_{name}.csv"))).unwrap();
        assert_eq!(cols.len(), 200);
        assert!(cols.iter().all(|c| c.len() == 200));
    }
}

#[test]
fn simulate_is_deterministic_under_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    simulate_blocky(a.path(), "7");
    simulate_blocky(b.path(), "7");
    let read = |d: &Path| std::fs::read(d.join("sim_noisy.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    simulate_blocky(c.path(), "8");
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn ias_laplace_converges_within_budget_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    simulate_blocky(dir.path(), "3");
    let d = dir.path().to_str().unwrap();
    let stdout = ok(&tvbayes(
        dir.path(),
        &[
            "deblur",
            "--input",
            &format!("{d}/sim_noisy.csv"),
            "--truth",
            &format!("{d}/sim_truth.csv"),
            "--method",
            "ias",
            "--prior",
            "laplace",
        ],
    ));
    assert!(stdout.contains("rel_l2"));
    let report = RunReport::read(&dir.path().join("deblur_report.json")).unwrap();
    assert!(report.converged);
    assert!(report.iterations <= 200, "{} iterations", report.iterations);
    assert_eq!(report.trace.len(), report.iterations);
    assert_eq!(report.estimator, "ias");
    assert_eq!(report.estimates.x.len(), 100);
    let m = report.metrics.unwrap();
    assert!(m.rel_l2 < 0.1, "rel_l2 {}", m.rel_l2);
    // Defaults are echoed.
    for key in ["safeguard_b", "tol", "maxit", "pcg_tol", "pcg_maxit_effective", "kernel_sigma_effective", "alpha_nu"] {
        assert!(!report.config[key].is_null(), "config lacks {key}");
    }
    assert_eq!(report.config["kernel_sigma_effective"], 1.75);
    let trace = read_columns_csv(&dir.path().join("deblur_trace.csv")).unwrap();
    assert_eq!(trace.len(), 7);
    assert_eq!(trace[0].len(), report.iterations);
    let est = read_signal_csv(&dir.path().join("deblur_estimate.csv")).unwrap();
    assert_eq!(est, report.estimates.x);
}

#[test]
fn vb_writes_std_and_factor_parameters() {
    let dir = tempfile::tempdir().unwrap();
    simulate_blocky(dir.path(), "4");
    let input = dir.path().join("sim_noisy.csv");
    ok(&tvbayes(dir.path(), &["deblur", "--input", input.to_str().unwrap(), "--method", "vb", "--out-prefix", "v"]));
    let std = read_signal_csv(&dir.path().join("v_std.csv")).unwrap();
    assert_eq!(std.len(), 100);
    assert!(std.iter().all(|s| *s > 0.0 && s.is_finite()));
    let f: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v_factors.json")).unwrap()).unwrap();
    // Flat hyperpriors: shapes N/2 and M/2.
    assert_eq!(f["nu"]["shape"], 50.0);
    assert_eq!(f["lambda"]["shape"], 50.0);
    assert!(f["nu"]["rate"].as_f64().unwrap() > 0.0);
    let report = RunReport::read(&dir.path().join("v_report.json")).unwrap();
    let nu_mean = f["nu"]["shape"].as_f64().unwrap() / f["nu"]["rate"].as_f64().unwrap();
    assert!((report.estimates.nu - nu_mean).abs() <= 1e-9 * nu_mean);
}

#[test]
fn vb_on_large_image_is_a_capacity_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(&tvbayes(dir.path(), &["simulate", "--kind", "shepp_logan", "--size", "200"]));
    let input = dir.path().join("sim_noisy.pgm");
    let out = tvbayes(dir.path(), &["deblur", "--input", input.to_str().unwrap(), "--method", "vb"]);
    assert_eq!(code(&out), 5);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("IAS"), "no guidance in: {err}");
    assert!(!dir.path().join("deblur_report.json").exists());
}

#[test]
fn gibbs_writes_full_hyperparameter_traces_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    simulate_blocky(dir.path(), "5");
    let input = dir.path().join("sim_noisy.csv");
    let run = |prefix: &str| {
        ok(&tvbayes(
            dir.path(),
            &[
                "deblur",
                "--input",
                input.to_str().unwrap(),
                "--method",
                "gibbs",
                "--samples",
                "10000",
                "--seed",
                "11",
                "--out-prefix",
                prefix,
            ],
        ))
    };
    run("g1");
    run("g2");
    for name in ["nu_trace.csv", "lambda_trace.csv"] {
        let t = read_signal_csv(&dir.path().join(format!("g1_{name}"))).unwrap();
        assert_eq!(t.len(), 10_000);
        assert!(t.iter().all(|v| *v > 0.0));
    }
    for name in ["estimate.csv", "std.csv", "nu_trace.csv"] {
        let a = std::fs::read(dir.path().join(format!("g1_{name}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("g2_{name}"))).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let report = RunReport::read(&dir.path().join("g1_report.json")).unwrap();
    assert_eq!(report.seed, Some(11));
    assert_eq!(report.config["burn_in_effective"], 2000);
}

#[test]
fn tikhonov_writes_single_row_trace() {
    let dir = tempfile::tempdir().unwrap();
    simulate_blocky(dir.path(), "6");
    let input = dir.path().join("sim_noisy.csv");
    ok(&tvbayes(dir.path(), &["deblur", "--input", input.to_str().unwrap(), "--method", "tikhonov", "--delta", "0.05"]));
    let report = RunReport::read(&dir.path().join("deblur_report.json")).unwrap();
    assert_eq!(report.iterations, 1);
    assert!((report.estimates.lambda / report.estimates.nu - 0.05).abs() < 1e-12);
    assert!(report.metrics.is_none());
}

#[test]
fn dist_prints_exponential_moment_and_mode() {
    let dir = tempfile::tempdir().unwrap();
    let m = ok(&tvbayes(dir.path(), &["dist", "--op", "moment", "--a", "2", "--b", "0", "--p", "1", "--q", "1"]));
    assert!((m.trim().parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    let mode = ok(&tvbayes(dir.path(), &["dist", "--op", "mode", "--a", "2", "--b", "0", "--p", "1"]));
    assert_eq!(mode.trim().parse::<f64>().unwrap(), 0.0);
    let pdf = ok(&tvbayes(dir.path(), &["dist", "--op", "pdf", "--a", "2", "--b", "0", "--p", "1", "--x", "0.5,2"]));
    let vals: Vec<f64> = pdf.lines().map(|l| l.parse().unwrap()).collect();
    assert!((vals[0] - (-0.5f64).exp()).abs() < 1e-12);
    assert!((vals[1] - (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn dist_sample_mean_matches_closed_form() {
    // p = -1/2 is the inverse Gaussian, mean sqrt(b / a).
    let dir = tempfile::tempdir().unwrap();
    ok(&tvbayes(
        dir.path(),
        &["dist", "--op", "sample", "--a", "2", "--b", "3", "--p", "-0.5", "--n", "100000", "--seed", "4", "--out", "s.csv"],
    ));
    let draws = read_signal_csv(&dir.path().join("s.csv")).unwrap();
    assert_eq!(draws.len(), 100_000);
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let exact = (3.0f64 / 2.0).sqrt();
    assert!((mean / exact - 1.0).abs() < 0.01, "mean {mean} vs {exact}");
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Inadmissible GIG parameters.
    assert_eq!(code(&tvbayes(d, &["dist", "--op", "mean", "--a", "0", "--b", "2", "--p", "0.5"])), 2);
    // Unknown flag value (rejected by the parser).
    assert_eq!(code(&tvbayes(d, &["simulate", "--kind", "stripes"])), 2);
    // Missing input file.
    let missing = d.join("nope.csv");
    assert_eq!(code(&tvbayes(d, &["deblur", "--input", missing.to_str().unwrap()])), 3);
    // Unsupported extension.
    let txt = d.join("x.txt");
    std::fs::write(&txt, "1\n").unwrap();
    assert_eq!(code(&tvbayes(d, &["deblur", "--input", txt.to_str().unwrap()])), 2);
    // Constant data: the penalty estimate blows up and the guard aborts.
    let flat = d.join("flat.csv");
    std::fs::write(&flat, format!("v\n{}", "1\n".repeat(50))).unwrap();
    let out = tvbayes(d, &["deblur", "--input", flat.to_str().unwrap(), "--kernel-size", "1", "--out-prefix", "flat"]);
    assert_eq!(code(&out), 6);
    assert!(!d.join("flat_report.json").exists());
    // Even kernel width.
    simulate_blocky(d, "1");
    let noisy = d.join("sim_noisy.csv");
    assert_eq!(code(&tvbayes(d, &["deblur", "--input", noisy.to_str().unwrap(), "--kernel-size", "4"])), 2);
    // Truth with the wrong shape.
    let short = d.join("short.csv");
    std::fs::write(&short, "v\n1\n2\n").unwrap();
    let out = tvbayes(d, &["deblur", "--input", noisy.to_str().unwrap(), "--truth", short.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}
