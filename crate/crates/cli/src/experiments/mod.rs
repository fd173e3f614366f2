//! Experiment drivers behind the `run` subcommand.

pub mod bench;
pub mod desk_eq;
pub mod games;
pub mod monotone;
pub mod repro;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "AGENTSEL_OUT_DIR";

/// Outcome of one experiment: emitted files plus a pass/fail gate used for
/// the process exit code (failed golden or bound checks exit with 2).
#[derive(Debug)]
pub struct ExperimentReport {
    pub kind: &'static str,
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub passed: bool,
    /// Human-readable result lines, also written to `report.txt`.
    pub lines: Vec<String>,
}

impl ExperimentReport {
    pub fn print(&self) {
        for line in &self.lines {
            println!("{line}");
        }
    }
}

/// Resolves the output directory: CLI flag, then environment, then config,
/// then `./agentsel-out`; a per-run subdirectory keyed by kind and hash.
pub fn resolve_out_dir(
    config: &ExperimentConfig,
    cli_override: Option<&Path>,
) -> Result<PathBuf> {
    let base = if let Some(dir) = cli_override {
        dir.to_path_buf()
    } else if let Ok(env_dir) = std::env::var(OUT_DIR_ENV) {
        PathBuf::from(env_dir)
    } else if let Some(dir) = &config.output().dir {
        dir.clone()
    } else {
        PathBuf::from("agentsel-out")
    };
    let hash = config.hash()?;
    let sub = format!("{}-{}", config.kind_name(), &hash[..8]);
    let dir = base.join(sub);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Runs any experiment config; the single entry point shared by the binary
/// and the acceptance suite.
pub fn run_config(
    config: &ExperimentConfig,
    cli_out: Option<&Path>,
) -> Result<ExperimentReport> {
    config.validate()?;
    let out_dir = resolve_out_dir(config, cli_out)?;
    let report = match config {
        ExperimentConfig::RegretBench {
            seeds,
            learner,
            bench,
            ..
        } => bench::run(config, seeds, learner, bench, &out_dir)?,
        ExperimentConfig::MonotoneCheck {
            seeds,
            learner,
            check,
            ..
        } => monotone::run(config, seeds, learner, check, &out_dir)?,
        ExperimentConfig::SimulateGame1 { seeds, game, .. } => {
            games::run(config, seeds, game, false, &out_dir)?
        }
        ExperimentConfig::SimulateGame2 { seeds, game, .. } => {
            games::run(config, seeds, game, true, &out_dir)?
        }
        ExperimentConfig::ReproAppendixB { .. } => repro::run(config, &out_dir)?,
        ExperimentConfig::DeskEq { seeds, desk, .. } => {
            desk_eq::run(config, seeds, desk, &out_dir)?
        }
    };
    let text = format!(
        "config {}\n{}\n",
        report.config_hash,
        report.lines.join("\n")
    );
    std::fs::write(out_dir.join("report.txt"), text)?;
    Ok(report)
}
