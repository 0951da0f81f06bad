//! `liftcal` command-line front end.

mod commands;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "liftcal", version, about = "Calibrate and compare fitted models using a held-out calibration set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the lifted linear model and test it against the identity lift.
    Calibrate(CalibrateArgs),
    /// Prediction intervals for the rows of a test file.
    Interval(IntervalArgs),
    /// LCD of the `f_hat` column.
    Lcd(LcdArgs),
    /// Rank every `f_hat:<label>` column by LCD.
    Rank(LcdArgs),
    /// MIC weights and an optional committee prediction.
    Mic(MicArgs),
    /// Flag outlying calibration points.
    Outliers(OutlierArgs),
    /// Prediction intervals from posterior sampling under a chosen noise family.
    McmcInterval(McmcArgs),
    /// Generate synthetic regression data.
    Simulate(SimulateArgs),
    /// Reliability curve: empirical against nominal coverage.
    Coverage(CoverageArgs),
}

#[derive(Args)]
struct CalibInput {
    /// Calibration CSV with columns `y` and `f_hat`.
    calib: PathBuf,
    /// Use only rows whose `split` column has this value.
    #[arg(long)]
    split: Option<String>,
}

#[derive(Args)]
struct TestInput {
    /// Test CSV with an `f_hat` column (and `y` when coverage is wanted).
    /// Defaults to the calibration file.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Use only test rows whose `split` column has this value.
    #[arg(long)]
    test_split: Option<String>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    input: CalibInput,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Seed for the Monte Carlo test threshold.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntervalArgs {
    #[command(flatten)]
    input: CalibInput,
    #[command(flatten)]
    test: TestInput,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Write the interval band as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkArg {
    Identity,
    Logit,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum NullArg {
    Uniform,
    Intercept,
}

#[derive(Args)]
struct LcdArgs {
    #[command(flatten)]
    input: CalibInput,
    #[arg(long, value_enum, default_value_t = LinkArg::Identity)]
    link: LinkArg,
    /// Null model; `uniform` for logit, `intercept` otherwise when omitted.
    #[arg(long, value_enum)]
    null: Option<NullArg>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MicArgs {
    /// CSV with columns `model_id`, `loss`, `complexity`.
    scores: PathBuf,
    /// CSV with `f_hat:<model_id>` columns to mix into a committee prediction.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Write the committee prediction as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OutlierArgs {
    #[command(flatten)]
    input: CalibInput,
    /// Fixed penalty; selected over a grid when omitted.
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of grid points on [0, lambda_max].
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// Write per-point offsets and flags as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Gumbel,
}

#[derive(Args)]
struct McmcArgs {
    #[command(flatten)]
    input: CalibInput,
    #[command(flatten)]
    test: TestInput,
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    family: FamilyArg,
    /// Retained posterior draws over all chains.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// Adaptation sweeps discarded per chain.
    #[arg(long, default_value_t = 5_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Write the interval band as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct SimulateArgs {
    #[command(subcommand)]
    action: Option<SimulateAction>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    sigma_eps: f64,
    /// Number of responses to replace with gross outliers.
    #[arg(long, default_value_t = 0)]
    outliers: usize,
    /// Write the data here; printed to standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateAction {
    /// Fit a baseline on a 70% training split and append its predictions.
    PredictBaseline(BaselineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mean,
    Ols,
    Knn,
}

#[derive(Args)]
struct BaselineArgs {
    /// Output of `simulate`.
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelArg::Ols)]
    model: ModelArg,
    /// Neighbours for `knn`.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Seed for the train/calib/test split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the augmented data here; printed to standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    input: CalibInput,
    #[command(flatten)]
    test: TestInput,
    /// Nominal levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95")]
    levels: Vec<f64>,
    /// Write the curve as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("liftcal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
