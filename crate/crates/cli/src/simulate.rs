use anyhow::Result;
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use tvbayes::harness::{add_noise_bsnr, make_image_2d, make_signal_1d, ImageKind, PgmFormat, SignalKind};
use tvbayes::{BlurOperator, Exec, LatticeSpec};

use crate::data::{self, Data, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    Blocky,
    BlockySmooth,
    Blocks42,
    SheppLogan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PgmEncoding {
    Binary,
    Ascii,
}

impl From<PgmEncoding> for PgmFormat {
    fn from(e: PgmEncoding) -> Self {
        match e {
            PgmEncoding::Binary => PgmFormat::Binary,
            PgmEncoding::Ascii => PgmFormat::Ascii,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Points (1-D) or image side; defaults to 100, 42 or 200 by kind.
    #[arg(long)]
    pub size: Option<usize>,
    /// Odd blur kernel width; 1 means no blur.
    #[arg(long, default_value_t = 7)]
    pub kernel_size: usize,
    /// Gaussian kernel standard deviation in pixels; default width / 4.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Blurred signal-to-noise ratio in dB.
    #[arg(long, default_value_t = 30.0)]
    pub bsnr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sim")]
    pub out_prefix: String,
    #[arg(long, value_enum, default_value_t = PgmEncoding::Binary)]
    pub pgm: PgmEncoding,
}

pub fn run(args: &SimulateArgs, out_dir: &Path) -> Result<()> {
    let (truth, lattice, shape) = match args.kind {
        Kind::Blocky | Kind::BlockySmooth => {
            let n = args.size.unwrap_or(100);
            let kind = if args.kind == Kind::Blocky { SignalKind::Blocky } else { SignalKind::BlockySmooth };
            (make_signal_1d(kind, n)?, LatticeSpec::line(n)?, Shape::Line)
        }
        Kind::Blocks42 | Kind::SheppLogan => {
            let kind = if args.kind == Kind::Blocks42 { ImageKind::Blocks42 } else { ImageKind::SheppLogan };
            let s = args.size.unwrap_or(kind.default_size());
            (make_image_2d(kind, s)?, LatticeSpec::new(s, s)?, Shape::Image)
        }
    };
    let kernel = data::kernel(shape, args.kernel_size, args.sigma)?;
    let h = BlurOperator::new(lattice, kernel.clone());
    let blurred = h.apply(&truth, Exec::Parallel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (noisy, noise_sigma) = add_noise_bsnr(&blurred, args.bsnr, &mut rng)?;

    let prefix = data::resolve_prefix(out_dir, &args.out_prefix)?;
    let fmt = args.pgm.into();
    let mut written = Vec::new();
    for (name, v) in [("truth", truth), ("blurred", blurred), ("noisy", noisy)] {
        written.extend(data::save(&prefix, name, &Data::new(lattice, shape, v), fmt)?);
    }
    let sidecar = data::sibling(&prefix, "sim.json");
    let size = match shape {
        Shape::Line => lattice.cols(),
        Shape::Image => lattice.rows(),
    };
    data::write_json(
        &sidecar,
        &serde_json::json!({
            "kind": args.kind,
            "size": size,
            "kernel_size": args.kernel_size,
            "kernel_sigma": args.sigma,
            "kernel": kernel,
            "bsnr_db": args.bsnr,
            "noise_sigma": noise_sigma,
            "seed": args.seed,
        }),
    )?;
    written.push(sidecar);
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}
