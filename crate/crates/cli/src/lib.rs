//! Experiment runner library: config-driven regret benches, monotonicity
//! checks, game simulations, desk-scale structural checks, and the golden
//! counterexample reproduction, with deterministic seeded outputs and
//! self-verifying run records.

pub mod config;
pub mod experiments;
pub mod fmt;
pub mod record;

pub use config::ExperimentConfig;
pub use experiments::{run_config, ExperimentReport, OUT_DIR_ENV};
pub use record::{RunRecord, VERIFY_TOL};
