// SPDX-License-Identifier: Apache-2.0

//! The `momentburst` command line: one binary, one subcommand per pipeline
//! stage. [`run`] is the whole program minus logger setup so it can be
//! driven in-process by tests.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

use config::ConfigFile;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing flags and configuration: exit 1.
    Usage(String),
    /// Unreadable or invalid data, failed training: exit 2.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<momentburst::Error> for CliError {
    fn from(e: momentburst::Error) -> Self {
        match e {
            momentburst::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "momentburst", about = "Key-moment detection in message streams", disable_version_flag = true)]
pub struct Cli {
    /// Print the version and the model file schema version.
    #[arg(long, short = 'V')]
    pub version: bool,

    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Settings shared by every subcommand. Each may also come from the
/// `--config` file under the same name with underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 or unset uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Slice length in seconds.
    #[arg(long, global = true)]
    pub delta: Option<i64>,
    /// Window length in seconds.
    #[arg(long, global = true)]
    pub omega: Option<i64>,
    /// History depth in windows (baselines: averaging depth in slices).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Ground-truth expansion in slices.
    #[arg(long, global = true)]
    pub tau: Option<i64>,
    /// Bursty tokens needed to flag a moment.
    #[arg(long, global = true)]
    pub rho: Option<usize>,
    /// Minimum token count in the newest window.
    #[arg(long, global = true)]
    pub min_count: Option<u64>,
    /// Seed lexicon, one token per line.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Model file.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long = "seed", global = true)]
    pub rng_seed: Option<u64>,
    /// Input stream(s), JSON lines (optionally gzipped). Repeatable.
    #[arg(long, global = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic stream and its ground truth.
    Synth(commands::SynthArgs),
    /// Dump raw and normalized features of every candidate token.
    Features,
    /// Build a labelled set from streams and train the ensemble.
    Train(commands::TrainArgs),
    /// Cross-validated hyperparameter search over both base learners.
    Gridsearch(commands::GridArgs),
    /// One round of self-training from unlabelled streams.
    Selftrain(commands::SelfTrainArgs),
    /// Classify every window of a stream.
    Detect,
    /// Volume or seed-token baseline Δ series.
    Baseline(commands::BaselineArgs),
    /// ROC and AUC of score series against ground truth.
    Eval(commands::EvalArgs),
    /// Cross-validated AUC with each feature family removed.
    Ablate(commands::AblateArgs),
}

pub fn version_line() -> String {
    format!("momentburst {} (model schema {})", env!("CARGO_PKG_VERSION"), momentburst::classify::MODEL_SCHEMA_VERSION)
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match try_run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn try_run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_end();
            return Err(CliError::Usage(text.strip_prefix("error: ").unwrap_or(text).to_string()));
        }
    };
    if cli.version {
        println!("{}", version_line());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("no subcommand given; see --help".into()));
    };
    let common = &cli.common;
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let threads = common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    pool.install(|| commands::dispatch(&command, common, &file))
}
