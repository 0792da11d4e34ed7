use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod data;
mod formats;
mod meta;

use data::DataArgs;

#[derive(Debug, Parser)]
#[command(name = "hawkes", version, about = "Simulate, fit and check exponential Hawkes processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate events from a parameter file
    Simulate(SimulateArgs),
    /// Fit a model to an event file
    Fit(FitArgs),
    /// Time-rescaling residual report for fitted or given parameters
    Gof(GofArgs),
    /// Negative log-likelihood over a grid of two decay coordinates
    Landscape(LandscapeArgs),
    /// Inter-arrival time summary per dimension
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Parameter file
    #[arg(long, required_unless_present = "mu", conflicts_with_all = ["mu", "alpha", "beta"])]
    pub params: Option<PathBuf>,
    /// Univariate baseline rate, instead of a parameter file
    #[arg(long, requires_all = ["alpha", "beta"])]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    /// End time in seconds
    #[arg(long, required_unless_present_any = ["max_events", "calendar", "days"])]
    pub horizon: Option<f64>,
    /// Stop after this many events
    #[arg(long, conflicts_with = "horizon")]
    pub max_events: Option<usize>,
    /// Trading calendar file; events only occur inside its intervals
    #[arg(long, conflicts_with = "days")]
    pub calendar: Option<PathBuf>,
    /// Regular calendar with this many trading days
    #[arg(long)]
    pub days: Option<usize>,
    /// Trading-day length in seconds for `--days`
    #[arg(long, default_value_t = 36000.0)]
    pub day_length: f64,
    /// Overnight gap in seconds for `--days`
    #[arg(long, default_value_t = 50400.0)]
    pub gap: f64,
    /// Also write the calendar used
    #[arg(long)]
    pub calendar_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    /// Plain Hawkes process on `[0, horizon]`
    Hawkes,
    /// Hawkes process switched off outside trading hours
    Daygap,
    /// Univariate model with overnight spillover
    Bowsher,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = FitModel::Hawkes)]
    pub model: FitModel,
    #[arg(long, default_value = "projected-newton")]
    pub inner_method: hawkes_core::optimize::InnerMethod,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_inner: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_outer: f64,
    #[arg(long, default_value_t = 500)]
    pub max_inner: usize,
    /// Outer iteration cap (default 200 M^2)
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Seed for random inner starting points
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restart every inner solve from a random point
    #[arg(long)]
    pub cold_start: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Parameter file, or a fit report
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Parameter file fixing everything off the grid
    #[arg(long)]
    pub params: PathBuf,
    /// First decay coordinate as `row,col`
    #[arg(long)]
    pub a: String,
    /// Second decay coordinate as `row,col`
    #[arg(long)]
    pub b: String,
    /// Range of the first coordinate as `lo:hi`
    #[arg(long)]
    pub range_a: String,
    /// Range of the second coordinate as `lo:hi`
    #[arg(long)]
    pub range_b: String,
    /// Grid points per axis
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// Space grid points geometrically
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Gof(a) => commands::gof(&a),
        Command::Landscape(a) => commands::landscape(&a),
        Command::Stats(a) => commands::stats(&a),
    }
}

pub fn parse_range(raw: &str) -> Result<(f64, f64)> {
    let Some((lo, hi)) = raw.split_once(':') else { bail!("range `{raw}` must look like lo:hi") };
    let (lo, hi): (f64, f64) = (lo.trim().parse()?, hi.trim().parse()?);
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        bail!("range `{raw}` must satisfy 0 < lo <= hi");
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
