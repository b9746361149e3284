mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use regioncount::experiments::{
    correlate_sweep, read_records_csv, render_scatter_svg, run_sweep, theory_dataset, write_records_csv,
    SweepConfig, SweepField,
};
use regioncount::regions::{region_count_estimate, EstimateConfig, SimplexSource};
use regioncount::subspace::default_resolution;
use regioncount::theory::{train_theory, TheoryTrainConfig, TrainTrace};
use regioncount::{suites, Error, LabeledDataset, Model};

use output::{csv_to_json, Format};

#[derive(Parser, Debug)]
#[command(name = "regioncount", version, about = "Count decision regions and check sharpness bounds")]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sweep configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the expected region count of a saved model.
    Count(CountArgs),
    /// Train a two-layer ReLU net with full-batch GD and trace the bounds.
    TrainTheory(TheoryArgs),
    /// Run a seeded property suite.
    Verify(VerifyArgs),
    /// Run a hyperparameter sweep and write the records CSV.
    Sweep(SweepArgs),
    /// Correlate two columns of a records CSV.
    Correlate(FieldArgs),
    /// Scatter plot of two columns of a records CSV as SVG.
    Plot(FieldArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Source {
    Train,
    Test,
    RandomDirection,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training points (CSV with a header, label in the last column).
    #[arg(long)]
    data: PathBuf,
    /// Held-out points, used with `--source test`.
    #[arg(long)]
    test_data: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    simplices: usize,
    /// Lattice points per axis (default depends on k).
    #[arg(long)]
    grid_m: Option<usize>,
    /// Barycentric coordinate range, e.g. `-1..2`.
    #[arg(long, default_value = "0..1", allow_hyphen_values = true)]
    range: Range,
    #[arg(long, value_enum, default_value_t = Source::Train)]
    source: Source,
    /// Edge length for `--source random-direction`.
    #[arg(long, default_value_t = 1.0)]
    direction_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Range {
    low: f64,
    high: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
        let low: f64 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
        let high: f64 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(format!("range needs finite LO < HI, got {s:?}"));
        }
        Ok(Range { low, high })
    }
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// Samples in the generated mixture.
    #[arg(long)]
    n: Option<usize>,
    /// Hidden width.
    #[arg(long, default_value_t = 64)]
    p: usize,
    /// Input dimension of the generated mixture (only 2 is supported).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    eta: f64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    checkpoint_every: usize,
    #[arg(long, default_value_t = 201)]
    segment_m: usize,
    #[arg(long, default_value_t = 0.5)]
    init_scale: f64,
    /// Binary dataset to train on instead of the generated mixture.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Save the final network as a model file.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    OracleRegions,
    LemmaRegion,
    LemmaSharpness,
    Theorem,
    Gradients,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Override the number of random instances.
    #[arg(long)]
    cases: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Record real per-cell wall times instead of zeros.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// Records CSV written by `sweep`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "region_mean")]
    x: SweepField,
    #[arg(long, default_value = "gap")]
    y: SweepField,
}

enum Failure {
    Usage(String),
    Violation(String),
    Precondition(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroMinNorm
            | Error::ZeroVariance(_)
            | Error::NotEnoughDistinctPoints { .. }
            | Error::BifurcationZone { .. } => Failure::Precondition(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn reject_config(cli: &Cli) -> CliResult {
    match &cli.config {
        Some(_) => Err(Failure::Usage("--config only applies to `sweep`".into())),
        None => Ok(()),
    }
}

fn count(cli: &Cli, args: &CountArgs) -> CliResult {
    reject_config(cli)?;
    if args.source == Source::Test && args.test_data.is_none() {
        return Err(Failure::Usage("--source test needs --test-data".into()));
    }
    if args.source != Source::Test && args.test_data.is_some() {
        return Err(Failure::Usage("--test-data is only read with --source test".into()));
    }
    let model = Model::load(&args.model)?;
    let data_path = match args.source {
        Source::Test => args.test_data.as_ref().expect("checked above"),
        _ => &args.data,
    };
    let train = LabeledDataset::read_csv(&args.data)?;
    let dataset = if args.source == Source::Test { LabeledDataset::read_csv(data_path)? } else { train };
    let source = match args.source {
        Source::RandomDirection => SimplexSource::RandomDirection { length: args.direction_length },
        _ => SimplexSource::DatasetPoints,
    };
    let config = EstimateConfig::new(args.k, args.simplices, cli.seed)
        .with_resolution(args.grid_m.unwrap_or_else(|| default_resolution(args.k)))
        .with_range(args.range.low, args.range.high)
        .with_source(source);
    let estimate = region_count_estimate(&model, &dataset, &config)?;
    let csv = format!("{}\n{}\n", regioncount::RegionCountEstimate::CSV_HEADER, estimate.to_csv_row());
    let text = match cli.format {
        Format::Csv => csv,
        Format::Json => csv_to_json(&csv, true)?,
    };
    std::io::stdout().write_all(text.as_bytes())?;
    if let Some(path) = &cli.out {
        fs::write(path, &text)?;
    }
    Ok(())
}

fn theory_data(cli: &Cli, args: &TheoryArgs) -> Result<LabeledDataset, Failure> {
    match &args.data {
        Some(path) => {
            let ds = LabeledDataset::read_csv(path)?;
            if args.n.is_some_and(|n| n != ds.len()) || args.d.is_some_and(|d| d != ds.dim()) {
                return Err(Failure::Usage("--n/--d disagree with the shape of --data".into()));
            }
            Ok(ds)
        }
        None => {
            if args.d.is_some_and(|d| d != 2) {
                return Err(Failure::Usage("the generated mixture is planar; pass --data for d ≠ 2".into()));
            }
            Ok(theory_dataset(args.n.unwrap_or(64), cli.seed)?)
        }
    }
}

fn trace_text(trace: &TrainTrace, format: Format) -> Result<String, Failure> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    let csv = String::from_utf8(buf).expect("CSV output is UTF-8");
    Ok(match format {
        Format::Csv => csv,
        Format::Json => csv_to_json(&csv, false)?,
    })
}

fn train_theory_cmd(cli: &Cli, args: &TheoryArgs) -> CliResult {
    reject_config(cli)?;
    let dataset = theory_data(cli, args)?;
    let config = TheoryTrainConfig {
        learning_rate: args.eta,
        steps: args.steps,
        checkpoint_every: args.checkpoint_every,
        seed: cli.seed,
        init_scale: args.init_scale,
        width: args.p,
        sharpness_tol: regioncount::theory::DEFAULT_SHARPNESS_TOL,
    };
    config.validate()?;
    if args.segment_m < 2 {
        return Err(Failure::Usage("--segment-m must be ≥ 2".into()));
    }
    if dataset.min_norm() == 0.0 {
        return Err(Error::ZeroMinNorm.into());
    }
    let net = config.init_net(dataset.dim())?;
    let trace = train_theory(&net, &dataset, &config, args.segment_m)?;
    emit(cli.out.as_deref(), &trace_text(&trace, cli.format)?)?;
    if let Some(path) = &args.save_model {
        Model::TwoLayerRelu(trace.final_net.clone()).save(path)?;
    }
    if trace.diverged {
        eprintln!("warning: training diverged; trace truncated at step {}", trace.last().step);
    }
    if let Some(bad) = trace.checkpoints.iter().find(|c| !c.bound_holds) {
        return Err(Failure::Violation(format!(
            "average region bound violated at step {}: {} > {}",
            bad.step, bad.mean_pairwise_region_count, bad.theorem_rhs
        )));
    }
    Ok(())
}

fn verify(cli: &Cli, args: &VerifyArgs) -> CliResult {
    reject_config(cli)?;
    let seed = cli.seed;
    let report = match args.suite {
        Suite::OracleRegions => suites::oracle_regions(args.cases.unwrap_or(1000), seed),
        Suite::LemmaRegion => suites::lemma_region(args.cases.unwrap_or(200), 1001, seed),
        Suite::LemmaSharpness => suites::lemma_sharpness(args.cases.unwrap_or(200), 10, seed),
        Suite::Theorem => suites::theorem(args.cases.unwrap_or(20), seed),
        Suite::Gradients => suites::gradients(args.cases.unwrap_or(20), seed),
    };
    let text = match cli.format {
        Format::Csv => format!("{}\n", report.summary()),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")),
    };
    emit(cli.out.as_deref(), &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{} failed; first counterexample seed {}",
            report.name,
            report.first_failing_seed.expect("a failed suite has a seed")
        )))
    }
}

fn sweep(cli: &Cli, args: &SweepArgs) -> CliResult {
    let config = match &cli.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    let records = run_sweep(&config)?;
    let mut buf = Vec::new();
    write_records_csv(&records, &mut buf, args.timing)?;
    let csv = String::from_utf8(buf).expect("CSV output is UTF-8");
    let text = match cli.format {
        Format::Csv => csv,
        Format::Json => csv_to_json(&csv, false)?,
    };
    emit(cli.out.as_deref(), &text)
}

fn read_records(path: &Path) -> Result<Vec<regioncount::experiments::SweepRecord>, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(read_records_csv(file)?)
}

fn correlate(cli: &Cli, args: &FieldArgs) -> CliResult {
    reject_config(cli)?;
    let records = read_records(&args.records)?;
    let report = correlate_sweep(&records, args.x, args.y)?;
    let csv = format!(
        "x,y,n,pearson,spearman\n{},{},{},{:?},{:?}\n",
        report.x_name, report.y_name, report.n, report.pearson, report.spearman
    );
    let text = match cli.format {
        Format::Csv => csv,
        Format::Json => csv_to_json(&csv, true)?,
    };
    emit(cli.out.as_deref(), &text)
}

fn plot(cli: &Cli, args: &FieldArgs) -> CliResult {
    reject_config(cli)?;
    let records = read_records(&args.records)?;
    emit(cli.out.as_deref(), &render_scatter_svg(&records, args.x, args.y)?)
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Count(a) => count(cli, a),
        Command::TrainTheory(a) => train_theory_cmd(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::Correlate(a) => correlate(cli, a),
        Command::Plot(a) => plot(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.workers {
        Some(0) => Err(Failure::Usage("--workers must be ≥ 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("precondition failed: {msg}");
            ExitCode::from(3)
        }
    }
}
