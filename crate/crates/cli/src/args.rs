use std::path::PathBuf;

use betapoly::Objective;
use clap::{Args, Parser, Subcommand};

/// Extremal statistics of random beta polygons in the unit disk.
#[derive(Debug, Parser)]
#[command(name = "betapoly", version)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw points from the beta distribution and write them as CSV.
    Sample(SampleArgs),
    /// Exact U-max statistic of a point file.
    Umax(UmaxArgs),
    /// Limit-law constants.
    Constants(ConstantsArgs),
    /// Finite-difference check of a kernel at its maximizers.
    Verify(VerifyArgs),
    /// Monte Carlo study of the scaled statistic.
    Simulate(SimulateArgs),
    /// Small-ε tail probabilities of the kernel.
    Tailprobe(TailprobeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Umax(_) => "umax",
            Command::Constants(_) => "constants",
            Command::Verify(_) => "verify",
            Command::Simulate(_) => "simulate",
            Command::Tailprobe(_) => "tailprobe",
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; `-` for stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UmaxArgs {
    /// CSV with header `x,y`.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub objective: Option<Objective>,
    /// Enumerate every subset instead of the hull dynamic program.
    #[arg(long)]
    pub brute_force: bool,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Print JSON instead of `key = value` lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub kernel: Option<Objective>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Use one step for the gradient, sub-Hessian and radial partials.
    #[arg(long)]
    pub step: Option<f64>,
    /// Richardson-extrapolate every difference quotient.
    #[arg(long)]
    pub richardson: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Comma-separated sample sizes.
    #[arg(long = "N", value_name = "N1,N2,..", value_delimiter = ',')]
    pub sample_sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Threshold for the consistency report (default 0.01).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Plotting-position window for the shape fit (default 0.05,0.6).
    #[arg(long, value_name = "LO,HI", value_delimiter = ',')]
    pub fit_window: Option<Vec<f64>>,
    /// Fill the `micros` column of trials.csv.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct TailprobeArgs {
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Comma-separated ε grid.
    #[arg(long, value_name = "E1,E2,..", value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Draws per ε.
    #[arg(long)]
    pub draws: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
