use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adrcause::cfs::{SearchConfig, DEFAULT_MAX_BINS, DEFAULT_MAX_STALE};
use adrcause::context::{DEFAULT_AB_ZERO_SUB, DEFAULT_ALPHA, DEFAULT_LOOKBACK_DAYS, DEFAULT_MONTH_DAYS};
use adrcause::{pipeline, synth, Database, ExtractorRegistry, Params, ScenarioConfig};
use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adrcause",
    version,
    about = "Causal attributes and feature selection for drug/event pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check schemas and referential integrity of an input directory
    Validate { input: PathBuf },
    /// Compute the labelled feature matrix
    Features {
        input: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Rank attributes of a feature matrix with correlation-based selection
    Select {
        matrix: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Generate a synthetic database from a scenario config
    Synth { config: PathBuf, output_dir: PathBuf },
    /// Compute features and rank them in one step
    Report {
        input: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Also write the feature matrix here
        #[arg(long)]
        features_out: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArg,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = DEFAULT_MONTH_DAYS)]
    month_days: i32,
    #[arg(long, default_value_t = DEFAULT_LOOKBACK_DAYS)]
    lookback_days: i32,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_AB_ZERO_SUB)]
    ab_zero_sub: f64,
    /// Worker threads; defaults to the number of CPUs
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated extractor names (default: all)
    #[arg(long, value_delimiter = ',')]
    extractors: Vec<String>,
}

#[derive(Args)]
struct SearchArgs {
    /// Consecutive non-improving expansions before the search stops
    #[arg(long, default_value_t = DEFAULT_MAX_STALE, conflicts_with = "exhaustive")]
    max_stale: usize,
    /// Run the search until the open list is empty
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_BINS as u16, value_parser = clap::value_parser!(u16).range(1..))]
    max_bins: u16,
}

#[derive(Args)]
struct OutputArg {
    /// Output file (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl ParamArgs {
    fn params(&self) -> Params {
        Params {
            month_days: self.month_days,
            lookback_days: self.lookback_days,
            alpha: self.alpha,
            ab_zero_sub: self.ab_zero_sub,
        }
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    fn registry(&self) -> Result<ExtractorRegistry> {
        let registry = ExtractorRegistry::with_defaults();
        if self.extractors.is_empty() {
            Ok(registry)
        } else {
            Ok(registry.select(&self.extractors)?)
        }
    }
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            max_stale: (!self.exhaustive).then_some(self.max_stale),
            max_bins: usize::from(self.max_bins),
        }
    }
}

impl OutputArg {
    fn write(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate { input } => {
            let db = Database::from_dir(&input)?;
            println!(
                "ok: {} patients, {} prescriptions, {} events, {} labelled pairs",
                db.patients().len(),
                db.prescriptions().len(),
                db.events().len(),
                db.labels().len()
            );
        }
        Command::Features { input, params, output } => {
            let registry = params.registry()?;
            let db = Database::from_dir(&input)?;
            let tsv = pipeline::features_tsv(&db, params.params(), &registry, params.workers())?;
            output.write(&tsv)?;
        }
        Command::Select { matrix, search, output } => {
            let report = pipeline::select_tsv(&read_file(&matrix)?, &search.config())?;
            output.write(&report)?;
        }
        Command::Synth { config, output_dir } => {
            let config = ScenarioConfig::parse(&read_file(&config)?)?;
            synth::generate(&config)?.write_to_dir(&output_dir)?;
        }
        Command::Report {
            input,
            params,
            search,
            features_out,
            output,
        } => {
            let registry = params.registry()?;
            let db = Database::from_dir(&input)?;
            let (features, report) =
                pipeline::report_tsv(&db, params.params(), &registry, params.workers(), &search.config())?;
            if let Some(path) = features_out {
                write_file(&path, &features)?;
            }
            output.write(&report)?;
        }
    }
    Ok(())
}

/// Flag values that parse but are out of range count as usage errors.
fn check_usage(command: &Command) -> Result<()> {
    if let Command::Features { params, .. } | Command::Report { params, .. } = command {
        params.params().validate()?;
        params.registry()?;
        if params.workers == Some(0) {
            anyhow::bail!("--workers must be at least 1");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on its own usage errors
    let cli = Cli::parse();
    if let Err(e) = check_usage(&cli.command) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
