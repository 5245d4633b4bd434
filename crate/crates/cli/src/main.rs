use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

/// Scores multi-instance referring-expression predictions and builds
/// synthetic benchmarks to check the scorer against.
#[derive(Debug, Parser)]
#[command(name = "refbench", version)]
struct Cli {
    /// Worker threads for per-referring scoring. Output does not depend on it.
    #[arg(long, global = true, env = "REFBENCH_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate predictions against a dataset.
    Evaluate(EvaluateArgs),
    /// Check a dataset file for invariant violations.
    Validate {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Compute dataset statistics.
    Stats(StatsArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Produce baseline predictions for a dataset.
    Baseline(BaselineArgs),
    /// Recall and precision bucketed by ground-truth instance count.
    Figure6 {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Also write full-precision rows to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NumeratorArg {
    ImagePersons,
    ReferringGt,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Score box predictions by their centers with the point-in-mask rule.
    #[arg(long)]
    point_eval: bool,
    #[arg(long, value_enum, default_value = "image-persons")]
    density_numerator: NumeratorArg,
    /// Only evaluate one subset.
    #[arg(long)]
    subset: Option<String>,
    /// Write the machine-readable report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Row label in the rendered table.
    #[arg(long, default_value = "predictions")]
    method: String,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Write persons-per-image and boxes-per-referring histograms as CSV files into this directory.
    #[arg(long)]
    histograms: Option<PathBuf>,
    /// Compare against a generation ledger and fail on any difference.
    #[arg(long)]
    check_ledger: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_images: Option<usize>,
    /// `N` or `MIN,MAX`.
    #[arg(long)]
    persons_per_image: Option<String>,
    /// `N` or `MIN,MAX`.
    #[arg(long)]
    gts_per_ref: Option<String>,
    /// `N` or `MIN,MAX`.
    #[arg(long)]
    refs_per_image: Option<String>,
    /// `WIDTH,HEIGHT`.
    #[arg(long)]
    image_size: Option<String>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    rejection_fraction: Option<f64>,
    /// Dataset output file.
    #[arg(long)]
    out: PathBuf,
    /// Ledger output file; defaults to `<out>.ledger.json`.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    AllPersons,
    Oracle,
    TopK,
    Empty,
    JitteredOracle,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Boxes kept by `top-k`.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Corner perturbation for `jittered-oracle`, as a fraction of box size.
    #[arg(long, default_value_t = 0.05)]
    jitter: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::with_workers(cli.workers, || match cli.command {
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Validate { dataset } => commands::validate(&dataset),
        Command::Stats(args) => commands::stats(&args),
        Command::Synth(args) => commands::synth(&args),
        Command::Baseline(args) => commands::baseline(&args),
        Command::Figure6 {
            dataset,
            predictions,
            csv,
        } => commands::figure6(&dataset, &predictions, csv.as_deref()),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.exit)
    }
}
