use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use refbench_core::datastats::{compute_stats, histogram_csv};
use refbench_core::io::{load_dataset, read_predictions, write_dataset, write_predictions, IoError, LoadedDataset};
use refbench_core::metrics::{aggregate, DensityNumerator, EvalOptions};
use refbench_core::model::{validate_dataset, PredictionSet, Subset};
use refbench_core::report::{buckets_csv, render_buckets, render_table};
use refbench_core::synth::{
    generate, ledger_mismatches, recall_by_instance_count, run_baseline, BaselineKind, CountRange, GenerationLedger,
    SynthConfig,
};

use crate::{BaselineArgs, EvaluateArgs, KindArg, NumeratorArg, StatsArgs, SynthArgs};

/// Exit status 1: evaluation or validation failure.
const EXIT_FAILURE: u8 = 1;
/// Exit status 2: usage or format error.
const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub exit: u8,
    pub file: Option<PathBuf>,
    pub line: Option<usize>,
    pub message: String,
}

impl CliError {
    fn new(code: &'static str, exit: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            exit,
            file: None,
            line: None,
            message: message.into(),
        }
    }

    fn at(mut self, file: &Path, line: Option<usize>) -> Self {
        self.file = Some(file.to_path_buf());
        self.line = line;
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some(file) = &self.file {
            write!(f, " {}", file.display())?;
            if let Some(line) = self.line {
                write!(f, ":{line}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("IO_ERROR", EXIT_USAGE, e.to_string()).at(path, None)
}

fn read_error(path: &Path, e: IoError) -> CliError {
    let message = match &e {
        IoError::Schema(s) => s.message.clone(),
        IoError::Io(io) => io.to_string(),
    };
    CliError::new(e.code(), EXIT_USAGE, message).at(path, e.line())
}

pub fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match workers {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| io_error(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn load(path: &Path) -> Result<LoadedDataset, CliError> {
    let loaded = load_dataset(open(path)?).map_err(|e| read_error(path, e))?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(loaded)
}

/// Loads a dataset and fails with exit 1 if it violates any invariant.
fn load_valid(path: &Path) -> Result<LoadedDataset, CliError> {
    let loaded = load(path)?;
    let violations = validate_dataset(&loaded.images);
    if let Some(first) = violations.first() {
        for v in &violations {
            let line = loaded.line_of(&v.image_id).map_or(String::new(), |l| format!(":{l}"));
            eprintln!("error[{}] {}{line}: {v}", v.code, path.display());
        }
        return Err(CliError::new(
            first.code.as_str(),
            EXIT_FAILURE,
            format!("dataset has {} violation(s)", violations.len()),
        )
        .at(path, loaded.line_of(&first.image_id)));
    }
    Ok(loaded)
}

fn load_predictions(path: &Path, loaded: &LoadedDataset) -> Result<Vec<PredictionSet>, CliError> {
    read_predictions(open(path)?, &loaded.images).map_err(|e| read_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn evaluate(args: &EvaluateArgs) -> Result<ExitCode, CliError> {
    let subset = args
        .subset
        .as_deref()
        .map(str::parse::<Subset>)
        .transpose()
        .map_err(|e| CliError::new(e.code(), EXIT_USAGE, e.to_string()))?;
    let options = EvalOptions {
        density_numerator: match args.density_numerator {
            NumeratorArg::ImagePersons => DensityNumerator::ImagePersons,
            NumeratorArg::ReferringGt => DensityNumerator::ReferringGt,
        },
        point_eval: args.point_eval,
        subset,
    };
    let loaded = load_valid(&args.dataset)?;
    let predictions = load_predictions(&args.predictions, &loaded)?;
    let eval = aggregate(&loaded.images, &predictions, &options)
        .map_err(|e| CliError::new(e.code(), EXIT_FAILURE, e.to_string()).at(&args.predictions, None))?;
    for w in &eval.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", render_table(&eval.report, &args.method));
    if let Some(path) = &args.report {
        let warnings: Vec<String> = eval.warnings.iter().map(ToString::to_string).collect();
        let doc = serde_json::json!({
            "options": options,
            "report": eval.report,
            "warnings": warnings,
        });
        write_text(path, &to_json(&doc))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn validate(dataset: &Path) -> Result<ExitCode, CliError> {
    let loaded = load(dataset)?;
    let violations = validate_dataset(&loaded.images);
    for v in &violations {
        let line = loaded.line_of(&v.image_id);
        let mut value = serde_json::to_value(v).expect("violation serializes");
        value["line"] = serde_json::json!(line);
        println!("{value}");
    }
    if violations.is_empty() {
        eprintln!("{}: ok ({} images)", dataset.display(), loaded.images.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{}: {} violation(s)", dataset.display(), violations.len());
        Ok(ExitCode::from(EXIT_FAILURE))
    }
}

pub fn stats(args: &StatsArgs) -> Result<ExitCode, CliError> {
    let loaded = load_valid(&args.dataset)?;
    let stats = compute_stats(&loaded.images);
    print!("{}", to_json(&stats));
    if let Some(dir) = &args.histograms {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        write_text(
            &dir.join("persons_per_image.csv"),
            &histogram_csv(&stats.persons_per_image_hist),
        )?;
        write_text(
            &dir.join("boxes_per_ref.csv"),
            &histogram_csv(&stats.boxes_per_ref_hist),
        )?;
    }
    if let Some(path) = &args.check_ledger {
        let ledger: GenerationLedger = serde_json::from_reader(open(path)?)
            .map_err(|e| CliError::new("SCHEMA_ERROR", EXIT_USAGE, e.to_string()).at(path, Some(e.line())))?;
        let mismatches = ledger_mismatches(&ledger, &stats);
        if !mismatches.is_empty() {
            for m in &mismatches {
                eprintln!("error[LEDGER_MISMATCH] {}: {m}", path.display());
            }
            return Err(CliError::new(
                "LEDGER_MISMATCH",
                EXIT_FAILURE,
                format!("{} field(s) differ from the ledger", mismatches.len()),
            )
            .at(path, None));
        }
        eprintln!("ledger check passed");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_range(name: &str, s: &str) -> Result<CountRange, CliError> {
    let bad = || CliError::new("USAGE", EXIT_USAGE, format!("--{name} expects N or MIN,MAX, got '{s}'"));
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match parts[..] {
        [n] => Ok(CountRange::exactly(n)),
        [a, b] => Ok(CountRange::new(a, b)),
        _ => Err(bad()),
    }
}

pub fn synth(args: &SynthArgs) -> Result<ExitCode, CliError> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_reader(open(path)?)
            .map_err(|e| CliError::new("SCHEMA_ERROR", EXIT_USAGE, e.to_string()).at(path, Some(e.line())))?,
        None => SynthConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.n_images {
        cfg.n_images = v;
    }
    if let Some(v) = &args.persons_per_image {
        cfg.persons_per_image = parse_range("persons-per-image", v)?;
    }
    if let Some(v) = &args.gts_per_ref {
        cfg.gts_per_ref = parse_range("gts-per-ref", v)?;
    }
    if let Some(v) = &args.refs_per_image {
        cfg.refs_per_image = parse_range("refs-per-image", v)?;
    }
    if let Some(v) = &args.image_size {
        let r = parse_range("image-size", v)?;
        cfg.image_size = (r.min as u32, r.max as u32);
    }
    if let Some(v) = args.jitter {
        cfg.jitter = v;
    }
    if let Some(v) = args.rejection_fraction {
        cfg.rejection_fraction = v;
    }

    let (dataset, ledger) = generate(&cfg).map_err(|e| {
        let exit = if e.code() == "INVALID_CONFIG" {
            EXIT_USAGE
        } else {
            EXIT_FAILURE
        };
        CliError::new(e.code(), exit, e.to_string())
    })?;
    let mut out = create(&args.out)?;
    write_dataset(&dataset, &mut out).map_err(|e| io_error(&args.out, e))?;
    let ledger_path = args.ledger.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".ledger.json");
        PathBuf::from(p)
    });
    write_text(&ledger_path, &to_json(&ledger))?;
    eprintln!(
        "wrote {} images, {} referrings to {}",
        ledger.n_images,
        ledger.n_referrings,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn baseline(args: &BaselineArgs) -> Result<ExitCode, CliError> {
    let kind = match args.kind {
        KindArg::AllPersons => BaselineKind::AllPersons,
        KindArg::Oracle => BaselineKind::Oracle,
        KindArg::TopK if args.k == 0 => {
            return Err(CliError::new("USAGE", EXIT_USAGE, "--k must be at least 1"));
        }
        KindArg::TopK => BaselineKind::TopK(args.k),
        KindArg::Empty => BaselineKind::Empty,
        KindArg::JitteredOracle => BaselineKind::JitteredOracle {
            jitter: args.jitter,
            seed: args.seed,
        },
    };
    let loaded = load_valid(&args.dataset)?;
    let predictions = run_baseline(kind, &loaded.images);
    let mut out = create(&args.out)?;
    write_predictions(&predictions, &mut out).map_err(|e| io_error(&args.out, e))?;
    out.flush().map_err(|e| io_error(&args.out, e))?;
    Ok(ExitCode::SUCCESS)
}

pub fn figure6(dataset: &Path, predictions: &Path, csv: Option<&Path>) -> Result<ExitCode, CliError> {
    let loaded = load_valid(dataset)?;
    let preds = load_predictions(predictions, &loaded)?;
    let buckets = recall_by_instance_count(&loaded.images, &preds, &EvalOptions::default())
        .map_err(|e| CliError::new(e.code(), EXIT_FAILURE, e.to_string()).at(predictions, None))?;
    print!("{}", render_buckets(&buckets));
    if let Some(path) = csv {
        write_text(path, &buckets_csv(&buckets))?;
    }
    Ok(ExitCode::SUCCESS)
}
