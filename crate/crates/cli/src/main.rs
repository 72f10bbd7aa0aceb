use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ctxlearn::classify::{ClassifierKind, Metric};
use ctxlearn::data::{
    generate_shift, load_dump, load_vowel, write_dump, ScenarioOptions, ShiftScenario, VowelColumns,
};
use ctxlearn::experiment::{
    parse_strategies, run_synthetic, run_vowel, SyntheticClassifier, SyntheticOptions, VowelOptions,
};
use ctxlearn::featrole::{classify_roles, DEFAULT_TOLERANCE};
use ctxlearn::report::{ExperimentReport, ReportFormat};

const VOWEL_SOURCE: &str = "UCI machine learning repository, undocumented/connectionist-bench/vowel/vowel-context.data \
                            (990 rows: 528 training rows from 8 speakers, 462 test rows from 7 speakers)";

#[derive(Parser)]
#[command(
    name = "ctxlearn",
    version,
    about = "Exploit contextual features when classifying"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect primary, contextual and irrelevant features in a discrete CSV dataset.
    Roles(RolesArgs),
    /// Vowel recognition with contextual normalization, expansion and weighting.
    Vowel(VowelArgs),
    /// Normalization comparison on generated cold/warm context-shift data.
    Synthetic(SyntheticArgs),
    /// Write a dataset in the canonical CSV format.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Records,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => ReportFormat::Table,
            Format::Csv => ReportFormat::Csv,
            Format::Records => ReportFormat::Records,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Manhattan => Metric::Manhattan,
        }
    }
}

#[derive(Args)]
struct RolesArgs {
    /// CSV dataset in the canonical dump format; every feature must be discrete.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// `table` or `records` (JSON).
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum VowelClassifier {
    Nn,
    Mlr,
}

#[derive(Clone, Copy, ValueEnum)]
enum VowelEstimator {
    Group,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Record the wall-clock time in the report metadata (breaks byte-identical output).
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args)]
struct VowelArgs {
    /// Path to vowel-context.data.
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated subset of norm,expand,weight (plus `select`), or `all-combos`.
    #[arg(long, default_value = "all-combos", allow_hyphen_values = true)]
    strategies: String,
    #[arg(long, value_enum, default_value = "nn")]
    classifier: VowelClassifier,
    /// Context estimator for normalization; speakers are only known by identity.
    #[arg(long, value_enum, default_value = "group")]
    estimator: VowelEstimator,
    /// Neighbours for the nearest-neighbour classifier.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "manhattan")]
    metric: MetricArg,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntheticClassifierArg {
    /// Both nn and mlr.
    All,
    Nn,
    Mlr,
    /// Per-regime classifier selection over nn.
    Select,
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sum counts over seeds seed, seed+1, ..., seed+repeats-1.
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[arg(long, value_enum, default_value = "all")]
    classifier: SyntheticClassifierArg,
    /// Neighbours for the nearest-neighbour classifier.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "manhattan")]
    metric: MetricArg,
    /// Neighbours for the knn context estimator.
    #[arg(long, default_value_t = 5)]
    estimator_k: usize,
    /// Stddev of the context-coupling coefficients (0 disables the shift).
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    rows: Option<usize>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct DumpArgs {
    /// Vowel data file to convert. Without it a synthetic dataset is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    coupling: Option<f64>,
}

fn emit(mut report: ExperimentReport, args: &ReportArgs) {
    if args.timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report.meta("timestamp", secs.to_string());
    }
    print!("{}", report.emit(args.format.into()));
}

fn cmd_roles(args: &RolesArgs) -> Result<()> {
    let ds = load_dump(&args.data).with_context(|| format!("loading {}", args.data.display()))?;
    let report = classify_roles(&ds, args.tolerance)?;
    match args.format {
        Format::Records => println!("{}", serde_json::to_string(&report)?),
        Format::Table => print!("{}", report.render_table()),
        Format::Csv => bail!("roles supports --format table or records"),
    }
    Ok(())
}

fn cmd_vowel(args: &VowelArgs) -> Result<()> {
    let VowelEstimator::Group = args.estimator;
    let data = load_vowel(&args.data, &VowelColumns::default())
        .with_context(|| format!("loading {} (expected: {VOWEL_SOURCE})", args.data.display()))?;
    for w in &data.warnings {
        eprintln!("warning: {w}");
    }
    let plan = parse_strategies(&args.strategies)?;
    let classifier = match args.classifier {
        VowelClassifier::Nn => ClassifierKind::NearestNeighbor {
            k: args.k,
            metric: args.metric.into(),
        },
        VowelClassifier::Mlr => ClassifierKind::Linear,
    };
    let opts = VowelOptions {
        classifier,
        select: plan.select,
    };
    emit(run_vowel(&data, &plan.sets, &opts)?, &args.report);
    Ok(())
}

fn scenario_options(
    coupling: Option<f64>,
    noise: Option<f64>,
    rows: Option<usize>,
) -> ScenarioOptions {
    let mut s = ScenarioOptions::default();
    if let Some(c) = coupling {
        s.coupling = c;
    }
    if let Some(n) = noise {
        s.noise = n;
    }
    if let Some(r) = rows {
        s.rows = r;
    }
    s
}

fn cmd_synthetic(args: &SyntheticArgs) -> Result<()> {
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let nn = ClassifierKind::NearestNeighbor {
        k: args.k,
        metric: args.metric.into(),
    };
    let classifiers = match args.classifier {
        SyntheticClassifierArg::All => vec![
            SyntheticClassifier::Single(nn),
            SyntheticClassifier::Single(ClassifierKind::Linear),
        ],
        SyntheticClassifierArg::Nn => vec![SyntheticClassifier::Single(nn)],
        SyntheticClassifierArg::Mlr => vec![SyntheticClassifier::Single(ClassifierKind::Linear)],
        SyntheticClassifierArg::Select => vec![
            SyntheticClassifier::Single(nn),
            SyntheticClassifier::Select(nn),
        ],
    };
    let opts = SyntheticOptions {
        scenario: scenario_options(args.coupling, args.noise, args.rows),
        classifiers,
        estimator_k: args.estimator_k,
    };
    let seeds: Vec<u64> = (0..args.repeats).map(|i| args.seed + i).collect();
    emit(run_synthetic(&seeds, &opts)?, &args.report);
    Ok(())
}

fn cmd_dump(args: &DumpArgs) -> Result<()> {
    let ds = match &args.data {
        Some(path) => load_vowel(path, &VowelColumns::default())?.dataset,
        None => {
            let scenario =
                ShiftScenario::new(args.seed, &scenario_options(args.coupling, None, None))?;
            generate_shift(&scenario)?
        }
    };
    print!("{}", write_dump(&ds));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Roles(a) => cmd_roles(a),
        Command::Vowel(a) => cmd_vowel(a),
        Command::Synthetic(a) => cmd_synthetic(a),
        Command::Dump(a) => cmd_dump(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
