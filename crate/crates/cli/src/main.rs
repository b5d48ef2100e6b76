//! `tvbayes` batch front end: `simulate`, `deblur` and `dist`.

mod data;
mod deblur;
mod dist;
mod exit;
mod simulate;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "tvbayes", version, about = "Bayesian total-variation deblurring")]
struct Cli {
    /// Directory that relative output prefixes are resolved against.
    #[arg(long, global = true, env = "TVBAYES_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a test signal or image, blur it and add noise.
    Simulate(simulate::SimulateArgs),
    /// Estimate the image from blurred, noisy data.
    Deblur(Box<deblur::DeblurArgs>),
    /// Evaluate or sample a GIG distribution.
    Dist(dist::DistArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate::run(a, &cli.out_dir),
        Command::Deblur(a) => deblur::run(a, &cli.out_dir),
        Command::Dist(a) => dist::run(a, &cli.out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e))
        }
    }
}
