use anyhow::Result;
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use tvbayes::harness::write_signal_csv;
use tvbayes::GigParams;

use crate::data;
use crate::exit::Usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
pub enum Op {
    Pdf,
    LogPdf,
    Moment,
    Mean,
    Mode,
    Var,
    Sample,
}

/// GIG(a, b, p) with density proportional to x^(p-1) exp(-(a x + b / x) / 2).
#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long, value_enum)]
    pub op: Op,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    /// Moment order for `moment`.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub q: f64,
    /// Evaluation points for `pdf` and `log-pdf`.
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Number of draws for `sample`.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination for `sample`; draws go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &DistArgs, out_dir: &Path) -> Result<()> {
    let g = GigParams::new(args.a, args.b, args.p)?;
    match args.op {
        Op::Pdf | Op::LogPdf => {
            if args.x.is_empty() {
                return Err(Usage("--x is required for pdf and log-pdf".into()).into());
            }
            for &x in &args.x {
                let l = g.log_pdf(x)?;
                println!("{}", if args.op == Op::Pdf { l.exp() } else { l });
            }
        }
        Op::Moment => println!("{}", g.moment(args.q)?),
        Op::Mean => println!("{}", g.mean()?),
        Op::Mode => println!("{}", g.mode()),
        Op::Var => println!("{}", g.variance()?),
        Op::Sample => {
            if args.n == 0 {
                return Err(Usage("--n must be positive".into()).into());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let draws: Vec<f64> = (0..args.n).map(|_| g.sample(&mut rng)).collect();
            match &args.out {
                Some(out) => {
                    let path = data::resolve_prefix(out_dir, &out.to_string_lossy())?;
                    write_signal_csv(&path, "x", &draws)?;
                    println!("{}", path.display());
                }
                None => draws.iter().for_each(|d| println!("{d}")),
            }
        }
    }
    Ok(())
}
