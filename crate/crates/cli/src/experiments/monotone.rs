//! Monotonicity suites over random perturbation pairs.

use std::path::Path;

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde::Serialize;

use agentsel_core::learners::{BlumMansour, ExpWeights, FullInfoLearner, TreeSwap, TreeSwapConfig};
use agentsel_core::monotone::{check_full_info, check_mono_bandit_exact, random_pair};
use agentsel_core::choose_epsilon;
use agentsel_core::regret;

use crate::config::{ExperimentConfig, LearnerAlgorithm, LearnerSpec, MonotoneSpec, Seeds};
use crate::experiments::ExperimentReport;

#[derive(Debug, Serialize)]
struct PairResult {
    pair_seed: u64,
    horizon: usize,
    arms: usize,
    monotone: bool,
    violations: usize,
    max_violation: f64,
}

#[derive(Debug, Serialize)]
struct MonotoneReportFile {
    config_hash: String,
    pairs: usize,
    violating_pairs: usize,
    max_violation: f64,
    results: Vec<PairResult>,
}

fn factory_for(
    spec: &LearnerSpec,
    arms: usize,
    horizon: usize,
) -> Result<Box<dyn Fn() -> Box<dyn FullInfoLearner + Send> + Send + Sync>> {
    let eta = spec.eta;
    let depth = spec.depth.unwrap_or(2);
    Ok(match spec.algorithm {
        LearnerAlgorithm::ExpWeights | LearnerAlgorithm::MonoBanditMw => Box::new(move || {
            Box::new(match eta {
                Some(e) => ExpWeights::new(arms, e).expect("validated eta"),
                None => ExpWeights::tuned(arms, horizon, 1.0).expect("positive horizon"),
            })
        }),
        LearnerAlgorithm::BlumMansour => Box::new(move || {
            let e = eta.unwrap_or_else(|| ((arms as f64).ln() / horizon as f64).sqrt());
            Box::new(BlumMansour::new(arms, e).expect("validated parameters"))
        }),
        LearnerAlgorithm::TreeSwap | LearnerAlgorithm::MonoBanditTreeswap => Box::new(move || {
            let config = TreeSwapConfig::for_horizon(depth, horizon).expect("valid depth");
            let steps = config.branching;
            let base = Box::new(move |_period: usize| match eta {
                Some(e) => ExpWeights::new(arms, e).expect("validated eta"),
                None => ExpWeights::tuned(arms, steps, 1.0).expect("positive steps"),
            });
            Box::new(TreeSwap::new(base, config).expect("valid config"))
        }),
    })
}

pub fn run(
    config: &ExperimentConfig,
    seeds: &Seeds,
    learner: &LearnerSpec,
    check: &MonotoneSpec,
    out_dir: &Path,
) -> Result<ExperimentReport> {
    let hash = config.hash()?;
    let results: Vec<PairResult> = (0..check.pairs as u64)
        .into_par_iter()
        .map(|i| {
            let pair_seed = seeds.base.wrapping_add(i);
            let pair = random_pair(pair_seed, check.max_horizon, check.max_arms);
            let arms = pair.arms();
            let horizon = pair.horizon();
            let verdict = if learner.algorithm.is_bandit() {
                let inner = factory_for(learner, arms, horizon)
                    .map_err(|e| anyhow!("factory: {e}"))?;
                let epsilon = match learner.epsilon {
                    Some(e) => e,
                    None => choose_epsilon(
                        horizon,
                        arms,
                        regret::bound_exp_weights(horizon, arms, 1.0),
                    )?,
                };
                check_mono_bandit_exact(inner.as_ref(), epsilon, &pair, check.tolerance)?
            } else {
                let factory = factory_for(learner, arms, horizon)?;
                check_full_info(factory.as_ref(), &pair, check.tolerance)?
            };
            Ok(PairResult {
                pair_seed,
                horizon,
                arms,
                monotone: verdict.monotone,
                violations: verdict.violating_rounds.len(),
                max_violation: verdict.max_violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let violating = results.iter().filter(|r| !r.monotone).count();
    let max_violation = results
        .iter()
        .map(|r| r.max_violation)
        .fold(f64::NEG_INFINITY, f64::max);
    let file = MonotoneReportFile {
        config_hash: hash.clone(),
        pairs: results.len(),
        violating_pairs: violating,
        max_violation,
        results,
    };
    std::fs::write(
        out_dir.join("monotone_report.json"),
        serde_json::to_string_pretty(&file)?,
    )?;

    let monotone_overall = violating == 0;
    let passed = match check.expect_monotone {
        Some(expected) => expected == monotone_overall,
        None => true,
    };
    let lines = vec![format!(
        "monotone-check: {} pairs, {} violating, max violation {:.3e}{}",
        file.pairs,
        violating,
        max_violation,
        match check.expect_monotone {
            Some(true) => {
                if monotone_overall {
                    " (expected monotone: satisfied)"
                } else {
                    " (expected monotone: VIOLATED)"
                }
            }
            Some(false) => {
                if monotone_overall {
                    " (expected violations: NONE FOUND)"
                } else {
                    " (expected violations: found)"
                }
            }
            None => "",
        }
    )];
    Ok(ExperimentReport {
        kind: config.kind_name(),
        config_hash: hash,
        out_dir: out_dir.to_path_buf(),
        passed,
        lines,
    })
}
