//! qaxlate: validate, inspect, translate and score extractive QA datasets.
//!
//! Exit codes: 0 success, 1 domain failure, 2 input or configuration error,
//! 3 backend failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{BleuModeArg, PipelineFlags};

#[derive(Debug)]
pub enum CliError {
    /// Violations, metric mismatches, unknown ids.
    Domain(String),
    /// Unreadable or malformed files, bad configuration, checkpoint problems.
    Input(String),
    Backend(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) | CliError::Backend(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "qaxlate", version, about = "Translate extractive QA datasets and recover answer spans")]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log filter, e.g. `info` or `qaxlate=debug`.
    #[arg(long, global = true)]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Check every answer offset against its context.
    Validate { input: PathBuf },

    /// Count articles, paragraphs and questions.
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },

    /// Translate a dataset and re-anchor every answer.
    Translate {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Progress log for resuming; defaults to `<output>.progress.jsonl`.
        #[arg(long)]
        progress: Option<PathBuf>,
        /// Run report; defaults to `<output>.report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Discard an existing progress log instead of resuming from it.
        #[arg(long)]
        restart: bool,
        #[command(flatten)]
        flags: PipelineFlags,
        /// Abort the process once this many articles are committed.
        #[arg(long, hide = true)]
        crash_after: Option<usize>,
        /// Leave a torn record at the end of the progress log when crashing.
        #[arg(long, hide = true, requires = "crash_after")]
        crash_partial: bool,
    },

    /// Score predictions against a dataset.
    Evaluate {
        dataset: PathBuf,
        /// JSON object mapping question id to predicted text.
        predictions: PathBuf,
        /// JSON report; defaults to `<predictions>.eval.json`.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        remove_articles: bool,
        #[arg(long, value_enum)]
        bleu_mode: Option<BleuModeArg>,
        /// Expected report; any metric off by more than 0.01 fails.
        #[arg(long)]
        expect: Option<PathBuf>,
    },

    /// Show the full alignment trace for one question.
    Inspect {
        input: PathBuf,
        qa_id: String,
        /// Number of scored candidates to show; all when omitted.
        #[arg(long)]
        top_k: Option<usize>,
        #[command(flatten)]
        flags: PipelineFlags,
    },

    /// Write a seeded synthetic multi-script corpus.
    Synth {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        qas: usize,
    },
}

fn init_logging(filter: &str) {
    env_logger::Builder::new().parse_filters(filter).format_timestamp(None).init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::CliConfig::load(cli.config.as_deref())?;
    if let Some(level) = &cli.log_level {
        cfg.log_level = level.clone();
    }
    init_logging(&cfg.log_level);
    match cli.command {
        Commands::Validate { input } => commands::validate(&input),
        Commands::Stats { inputs } => commands::stats(&inputs),
        Commands::Translate { input, output, progress, report, restart, flags, crash_after, crash_partial } => {
            cfg.apply(&flags);
            cfg.echo();
            let crash = crash_after.map(|after| commands::Crash { after, partial: crash_partial });
            commands::translate(&cfg, &input, &output, progress, report, restart, crash)
        }
        Commands::Evaluate { dataset, predictions, report, remove_articles, bleu_mode, expect } => {
            cfg.apply_metrics(remove_articles, bleu_mode);
            cfg.echo();
            commands::evaluate(&cfg, &dataset, &predictions, report, expect.as_deref())
        }
        Commands::Inspect { input, qa_id, top_k, flags } => {
            cfg.apply(&flags);
            cfg.echo();
            commands::inspect(&cfg, &input, &qa_id, top_k)
        }
        Commands::Synth { output, seed, qas } => commands::synth(&output, seed, qas),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
