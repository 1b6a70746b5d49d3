//! `amr-summ`: turn clusters of AMR-annotated sentences into summary AMR
//! graphs.
//!
//! Subcommands: `select` (spectral sentence clustering), `train`
//! (structured perceptron / ramp loss), `summarize` (exact subtree
//! decoding to PENMAN), `evaluate` (Smatch, node/edge P/R/F, ROUGE,
//! abstractiveness), and `penman` (round-trip check of a corpus file).
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O or data error,
//! 4 nothing to do, 5 strict-mode decode failure.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_loss, parse_metric, PipelineConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    EmptyWork(String),
    StrictDecode(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::EmptyWork(_) => 4,
            CliError::StrictDecode(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Data(m)
            | CliError::EmptyWork(m)
            | CliError::StrictDecode(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "amr-summ", version, about = "AMR-based multi-document summarization")]
struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// process clusters with up to this many worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// fail (exit 5) when decoding hits the expansion cap
    #[arg(long, global = true)]
    strict: bool,
    /// training-data selection strategy: lcs|vsm|smatch|cov
    #[arg(long, global = true)]
    metric: Option<String>,
    /// training loss: perc|ramp
    #[arg(long, global = true)]
    loss: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster source sentences into topic aspects and write cluster files
    Select,
    /// Build training instances from reference summaries and fit a model
    Train,
    /// Decode a summary graph per cluster and write PENMAN output
    Summarize,
    /// Score predictions against references
    Evaluate {
        /// predictions corpus file (PENMAN blocks)
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// references corpus file (PENMAN blocks)
        #[arg(long)]
        references: Option<PathBuf>,
    },
    /// Round-trip check every PENMAN block of a file
    Penman { file: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs.max(1);
    }
    if cli.strict {
        cfg.strict = true;
    }
    if let Some(metric) = &cli.metric {
        cfg.metric = parse_metric(metric)?;
    }
    if let Some(loss) = &cli.loss {
        cfg.loss = parse_loss(loss)?;
    }
    match &cli.command {
        Command::Evaluate { predictions, references } => {
            if let Some(p) = predictions {
                cfg.predictions = Some(p.clone());
            }
            if let Some(r) = references {
                cfg.references = Some(r.clone());
            }
        }
        _ => {}
    }
    cfg.validate()?;
    match cli.command {
        Command::Select => pipeline::cmd_select(&cfg),
        Command::Train => pipeline::cmd_train(&cfg),
        Command::Summarize => pipeline::cmd_summarize(&cfg),
        Command::Evaluate { .. } => pipeline::cmd_evaluate(&cfg),
        Command::Penman { file } => pipeline::cmd_penman(&file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
