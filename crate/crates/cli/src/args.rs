use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ssqw", version, about = "Split-step quantum walk distribution loading and option pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a target histogram and write it as JSON.
    GenTarget(GenTargetArgs),
    /// Train coin angles against a target file.
    Train(TrainArgs),
    /// Price a European call on a target and a trained distribution.
    Price(PriceArgs),
    /// Build a daily-return histogram from a quotes CSV.
    Ingest(IngestArgs),
    /// Run the normal fit, log-normal fit and option pricing recipes end to end.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Normal,
    Lognormal,
    Bs,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolReading {
    /// The volatility figure is already the log-price standard deviation.
    AsGiven,
    /// Log-price standard deviation is vol * sqrt(T).
    VolSqrtT,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Cobyla,
    NelderMead,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GridArgs {
    /// Number of bins (a power of two).
    #[arg(long, default_value_t = 16)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    pub hi: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OptionArgs {
    #[arg(long, default_value_t = 2.0)]
    pub s0: f64,
    /// Strike.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    /// Risk-free rate.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub r: f64,
    /// Maturity.
    #[arg(long, default_value_t = 40.0)]
    pub t: f64,
    /// Volatility; see --vol-reading.
    #[arg(long = "vol", default_value_t = 0.4)]
    pub vol: f64,
    #[arg(long, value_enum, default_value_t = VolReading::AsGiven)]
    pub vol_reading: VolReading,
    /// Expected return; defaults to the risk-free rate.
    #[arg(long, allow_negative_numbers = true)]
    pub drift: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GenTargetArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Location: the mean (normal) or mean of ln X (lognormal).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Scale: standard deviation (normal) or of ln X (lognormal). For `bs`, the volatility.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Draw this many samples instead of integrating the density.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub option: OptionArgs,
    /// Output JSON path. Defaults to `target.json` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Target JSON written by gen-target or ingest.
    #[arg(long)]
    pub target: PathBuf,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 800)]
    pub max_iters: usize,
    /// Walk steps.
    #[arg(long, default_value_t = 7)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimize only the two mixing angles, phases pinned to zero.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long, value_enum, default_value_t = Optimizer::Cobyla)]
    pub optimizer: Optimizer,
    #[arg(long, default_value_t = 0.5)]
    pub initial_trust_radius: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub final_trust_radius: f64,
    /// Six comma-separated starting angles: theta1,phi1,lambda1,theta2,phi2,lambda2.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub init_params: Option<Vec<f64>>,
    /// Start site of the walker. Defaults to the center of the register.
    #[arg(long)]
    pub start_position: Option<usize>,
    /// Exit with status 1 unless best_mse is at or below this value.
    #[arg(long)]
    pub mse_gate: Option<f64>,
    /// Output JSON path. Defaults to `training.json` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot CSV path. Defaults to the JSON path with a `.csv` extension.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PriceArgs {
    #[arg(long)]
    pub target: PathBuf,
    /// Training JSON written by `train`.
    #[arg(long)]
    pub trained: PathBuf,
    #[command(flatten)]
    pub option: OptionArgs,
    /// Use option parameters from the command line even if the target records its own.
    #[arg(long)]
    pub ignore_target_option: bool,
    /// Multiply payoffs by exp(-rT).
    #[arg(long)]
    pub discount: bool,
    /// Reference payoff to report the target payoff against.
    #[arg(long)]
    pub reference: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Quotes CSV with a Date column and Close or Adj Close.
    #[arg(long)]
    pub csv: PathBuf,
    /// First date kept (inclusive), YYYY-MM-DD.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last date kept (inclusive), YYYY-MM-DD.
    #[arg(long)]
    pub end: Option<NaiveDate>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add this to every percent return. Without it the smallest return
    /// lands one bin above `lo`.
    #[arg(long, allow_negative_numbers = true)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReproArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Directory for all artifacts. Defaults to the output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
