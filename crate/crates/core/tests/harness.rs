use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tvbayes::harness::*;
use tvbayes::operators::{BlurOperator, DiffOperator, Kernel, LatticeSpec};
use tvbayes::Exec;
use tvbayes_oracles::SplitMix;

fn lattice(k: usize, n: usize) -> LatticeSpec {
    LatticeSpec::new(k, n).unwrap()
}

#[test]
fn pgm_binary_round_trip_is_exact_after_quantisation() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = SplitMix::new(3);
    let img = GrayImage { width: 7, height: 5, pixels: g.vec(35, -0.2, 1.2) };
    let path = dir.path().join("a.pgm");
    write_pgm(&path, &img, PgmFormat::Binary).unwrap();
    let back = read_pgm(&path).unwrap();
    assert_eq!((back.width, back.height), (7, 5));
    assert_eq!(back.pixels, img.quantized());
    // A second round trip is the identity.
    write_pgm(&path, &back, PgmFormat::Binary).unwrap();
    assert_eq!(read_pgm(&path).unwrap(), back);
}

#[test]
fn ascii_and_binary_decode_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = SplitMix::new(4);
    let img = GrayImage { width: 11, height: 3, pixels: g.vec(33, 0.0, 1.0) };
    let (pa, pb) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    write_pgm(&pa, &img, PgmFormat::Ascii).unwrap();
    write_pgm(&pb, &img, PgmFormat::Binary).unwrap();
    assert!(std::fs::read(&pa).unwrap().starts_with(b"P2"));
    assert!(std::fs::read(&pb).unwrap().starts_with(b"P5"));
    assert_eq!(read_pgm(&pa).unwrap(), read_pgm(&pb).unwrap());
}

#[test]
fn stacking_follows_column_order() {
    // 2 rows × 3 cols, row-major file order 0..6.
    let img = GrayImage { width: 3, height: 2, pixels: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0] };
    let stacked = img.to_stacked().unwrap();
    assert_eq!(stacked, vec![0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
    assert_eq!(GrayImage::from_stacked(lattice(2, 3), &stacked).unwrap(), img);
}

#[test]
fn truncated_file_on_disk_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.pgm");
    std::fs::write(&path, b"P5\n4 4\n255\n\x00\x01").unwrap();
    match read_pgm(&path) {
        Err(HarnessError::Parse { offset, .. }) => assert!(offset >= 11),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let mut g = SplitMix::new(5);
    let mut v: Vec<f64> = (0..200).map(|_| g.normal() * 10f64.powi((g.uniform() * 20.0) as i32 - 10)).collect();
    v.push(std::f64::consts::PI);
    v.push(-0.0);
    write_signal_csv(&path, "value", &v).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("value\n"));
    let back = read_signal_csv(&path).unwrap();
    assert_eq!(back.len(), v.len());
    for (a, b) in back.iter().zip(&v) {
        assert_eq!(a.to_bits() & !(1 << 63), b.to_bits() & !(1 << 63));
        assert_eq!(a, b);
    }
}

#[test]
fn multi_column_csv_first_column_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_columns_csv(&path, &["a", "b"], &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,3\n2,4\n");
    assert_eq!(read_signal_csv(&path).unwrap(), vec![1.0, 2.0]);
}

#[test]
fn bsnr_hits_target_on_long_signal() {
    let mut g = SplitMix::new(8);
    let l = LatticeSpec::line(10_000).unwrap();
    let raw = g.vec(10_000, 0.0, 1.0);
    let h = BlurOperator::new(l, Kernel::gaussian_1d(9, None).unwrap());
    let blurred = h.apply(&raw, Exec::Sequential).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let (noisy, sigma) = add_noise_bsnr(&blurred, 30.0, &mut rng).unwrap();
    let expected_sigma = (sample_variance(&blurred) / 1e3).sqrt();
    assert!((sigma - expected_sigma).abs() < 1e-15 * expected_sigma.max(1.0));
    // Empirical noise variance, independently.
    let resid: Vec<f64> = noisy.iter().zip(&blurred).map(|(a, b)| a - b).collect();
    let emp = 10.0 * (tvbayes_oracles::variance(&blurred) / tvbayes_oracles::variance(&resid)).log10();
    assert!((29.5..=30.5).contains(&emp), "measured {emp}");
    assert!((measured_bsnr(&blurred, &noisy) - emp).abs() < 1e-9);
}

#[test]
fn bsnr_deterministic_under_seed() {
    let x = make_signal_1d(SignalKind::Blocky, 100).unwrap();
    let a = add_noise_bsnr(&x, 20.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = add_noise_bsnr(&x, 20.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn blocky_signal_properties() {
    for &n in &[8, 37, 100, 256] {
        let s = make_signal_1d(SignalKind::Blocky, n).unwrap();
        assert_eq!(s.len(), n);
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        let d = DiffOperator::periodic(LatticeSpec::line(n).unwrap()).apply(&s, Exec::Sequential).unwrap();
        let jumps = d.iter().filter(|v| **v != 0.0).count();
        // At most five interior jumps plus the wrap-around edge.
        assert!(jumps <= 6, "n={n}: {jumps} jumps");
    }
    let s = make_signal_1d(SignalKind::Blocky, 100).unwrap();
    let mut levels: Vec<f64> = s.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    assert!(levels.len() >= 3);
}

#[test]
fn blocky_smooth_has_smooth_segment() {
    let n = 100;
    let s = make_signal_1d(SignalKind::BlockySmooth, n).unwrap();
    assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
    // Longest run of consecutive indices with nonzero second difference.
    let mut best = 0;
    let mut run = 0;
    for i in 1..n - 1 {
        if (s[i + 1] - 2.0 * s[i] + s[i - 1]).abs() > 1e-12 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    assert!(best >= 10, "longest curved run {best}");
}

#[test]
fn shepp_logan_membership_oracle() {
    let size = 200;
    let img = make_image_2d(ImageKind::SheppLogan, size).unwrap();
    let l = lattice(size, size);
    let ells = shepp_logan_ellipses();
    let mut g = SplitMix::new(11);
    for _ in 0..500 {
        let i = (g.uniform() * size as f64) as usize;
        let j = (g.uniform() * size as f64) as usize;
        let x = (2.0 * j as f64 + 1.0) / size as f64 - 1.0;
        let y = 1.0 - (2.0 * i as f64 + 1.0) / size as f64;
        let v: f64 = ells.iter().filter(|e| e.contains(x, y)).map(|e| e.value).sum();
        assert!((img[l.index(i, j)] - v.clamp(0.0, 1.0)).abs() < 1e-12);
        if ells[0].contains(x, y) && !ells[1].contains(x, y) {
            assert!(img[l.index(i, j)] > 0.0);
        } else if ells[0].contains(x, y) {
            assert!(img[l.index(i, j)] < 1.0);
        } else {
            assert_eq!(img[l.index(i, j)], 0.0);
        }
    }
    assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn shepp_logan_mirror_symmetry_away_from_asymmetric_features() {
    let size = 200;
    let img = make_image_2d(ImageKind::SheppLogan, size).unwrap();
    let l = lattice(size, size);
    let ells = shepp_logan_ellipses();
    // The two tilted ellipses differ in size and the small bottom cluster is
    // offset, so pixels touching them are skipped.
    let asymmetric = [2usize, 3, 7, 8, 9];
    let mut checked = 0;
    for i in 0..size {
        for j in 0..size / 2 {
            let jm = size - 1 - j;
            let x = (2.0 * j as f64 + 1.0) / size as f64 - 1.0;
            let y = 1.0 - (2.0 * i as f64 + 1.0) / size as f64;
            if asymmetric.iter().any(|&e| ells[e].contains(x, y) || ells[e].contains(-x, y)) {
                continue;
            }
            assert!((img[l.index(i, j)] - img[l.index(i, jm)]).abs() < 1e-12, "pixel ({i},{j})");
            checked += 1;
        }
    }
    assert!(checked > 15_000);
}

#[test]
fn blocks42_is_piecewise_constant() {
    let img = make_image_2d(ImageKind::Blocks42, 42).unwrap();
    let l = lattice(42, 42);
    let d = DiffOperator::periodic(l).apply(&img, Exec::Sequential).unwrap();
    let nnz = d.iter().filter(|v| **v != 0.0).count();
    assert!(nnz > 0 && nnz * 5 < d.len(), "{nnz} of {}", d.len());
    assert_eq!(ImageKind::Blocks42.default_size(), 42);
    assert_eq!(ImageKind::SheppLogan.default_size(), 200);
}

#[test]
fn metrics_match_direct_recomputation() {
    let mut g = SplitMix::new(13);
    for _ in 0..20 {
        let t = g.vec(64, 0.0, 2.0);
        let e = g.vec(64, -0.3, 0.3);
        let h: Vec<f64> = t.iter().zip(&e).map(|(a, b)| a + b).collect();
        let m = metrics(&h, &t).unwrap();
        let err2: f64 = e.iter().map(|v| v * v).sum();
        let peak = t.iter().cloned().fold(f64::MIN, f64::max);
        assert!((m.rel_l2 - err2.sqrt() / tvbayes_oracles::norm(&t)).abs() < 1e-14);
        assert!((m.psnr - 10.0 * (peak * peak * 64.0 / err2).log10()).abs() < 1e-10);
    }
}

fn report(metrics: Option<Metrics>) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        estimator: "ias".into(),
        config: serde_json::json!({ "tol": 1e-6, "maxit": 200 }),
        // Values whose shortest decimal form needs a correctly rounded parser.
        estimates: Estimates {
            x: vec![0.1 + 0.2, 1.0 / 3.0, 0.9992187656965532, -7.13537255556178e-5, 0.4997209433992037],
            nu: 3.0,
            lambda: 4.0,
        },
        iterations: 2,
        converged: true,
        trace: vec![serde_json::json!({ "iteration": 1 }), serde_json::json!({ "iteration": 2 })],
        metrics,
        wall_time_s: 0.01,
        seed: Some(9),
    }
}

#[test]
fn run_report_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let perfect = metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
    let r = report(Some(perfect));
    r.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["metrics"]["psnr"], "inf");
    for key in ["estimator", "config", "estimates", "iterations", "converged", "trace", "wall_time_s", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(RunReport::read(&path).unwrap(), r);
}

#[test]
fn run_report_rejects_trace_length_mismatch() {
    let mut r = report(None);
    r.iterations = 3;
    let dir = tempfile::tempdir().unwrap();
    assert!(r.write(&dir.path().join("bad.json")).is_err());
}

#[test]
fn image_csv_rows_are_lattice_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.csv");
    let l = lattice(3, 4);
    let mut g = SplitMix::new(9);
    let stacked: Vec<f64> = (0..l.len()).map(|_| g.normal()).collect();
    write_image_csv(&path, l, &stacked).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "c0,c1,c2,c3");
    assert_eq!(text.lines().count(), 4);
    let cols = read_columns_csv(&path).unwrap();
    assert_eq!(cols.len(), 4);
    assert_eq!(cols.concat(), stacked);
}
