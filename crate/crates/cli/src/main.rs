//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 golden/bound check
//! failure, 3 internal numerical error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use agentsel_cli::config::ExperimentConfig;
use agentsel_cli::experiments::run_config;
use agentsel_cli::record::RunRecord;

#[derive(Parser)]
#[command(
    name = "agentsel",
    about = "Seeded online-learning and agent-selection experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Output directory (overrides config and AGENTSEL_OUT_DIR).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recompute a run record's summary from its rows and compare.
    Verify {
        /// Path to a run_seed*.json record.
        record: PathBuf,
    },
    /// Shortcut: reproduce the bundled golden counterexample.
    ReproAppendixB {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn classify_error(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<agentsel_core::CoreError>() {
            return match core {
                agentsel_core::CoreError::Numerical { .. } => EXIT_NUMERICAL,
                agentsel_core::CoreError::GoldenMismatch(_) => EXIT_CHECK_FAILED,
                _ => EXIT_CONFIG,
            };
        }
        if let Some(sim) = cause.downcast_ref::<agentsel_sim::SimError>() {
            return match sim {
                agentsel_sim::SimError::Core(agentsel_core::CoreError::Numerical { .. }) => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_CONFIG,
            };
        }
    }
    EXIT_CONFIG
}

fn run(cli: Cli) -> Result<u8, anyhow::Error> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| anyhow::anyhow!("reading {}: {e}", config.display()))?;
            let parsed = ExperimentConfig::parse(&text)?;
            let report = run_config(&parsed, out_dir.as_deref())?;
            report.print();
            println!("outputs: {}", report.out_dir.display());
            Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Verify { record } => {
            let parsed = RunRecord::read_json(&record)?;
            let mismatches = parsed.verify()?;
            if mismatches.is_empty() {
                println!(
                    "verify: ok (seed {}, {} rows)",
                    parsed.seed,
                    parsed.rows.len()
                );
                Ok(0)
            } else {
                for m in &mismatches {
                    println!("verify: MISMATCH {m}");
                }
                Ok(EXIT_CHECK_FAILED)
            }
        }
        Command::ReproAppendixB { out_dir } => {
            let config = ExperimentConfig::ReproAppendixB {
                output: Default::default(),
            };
            let report = run_config(&config, out_dir.as_deref())?;
            report.print();
            println!("outputs: {}", report.out_dir.display());
            Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}
