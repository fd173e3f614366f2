//! Regret benches: run a learner against a loss suite over replicate seeds,
//! meter regrets, and compare means against the analytic bounds.

use std::path::Path;

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde::Serialize;

use agentsel_core::adversary::{AdaptiveAdversary, IidSuite, MostPlayedPunisher, PhaseShiftSuite};
use agentsel_core::bandit::MonoBandit;
use agentsel_core::dist::LossRange;
use agentsel_core::learners::{
    BlumMansour, ExpWeights, FullInfoLearner, TreeSwap, TreeSwapConfig,
};
use agentsel_core::regret;
use agentsel_core::rng::{SeededRng, StreamId};
use agentsel_core::runner::{run_bandit, run_full_info, RunOutcome};
use agentsel_core::choose_epsilon;

use crate::config::{BenchSpec, ExperimentConfig, LearnerAlgorithm, LearnerSpec, LossSuite, Seeds};
use crate::experiments::ExperimentReport;
use crate::record::{CumulativeRegret, RoundRow, RunRecord, RunSummary};

pub fn make_adversary(suite: LossSuite, seed: u64, arms: usize) -> Box<dyn AdaptiveAdversary> {
    match suite {
        LossSuite::Iid => Box::new(IidSuite::new(seed, arms)),
        LossSuite::PhaseShift => Box::new(PhaseShiftSuite::new(seed, arms, 250.max(1))),
        LossSuite::MostPlayedPunisher => Box::new(MostPlayedPunisher::new(arms)),
    }
}

fn full_info_learner(
    spec: &LearnerSpec,
    arms: usize,
    horizon: usize,
) -> Result<Box<dyn FullInfoLearner + Send>> {
    let learner: Box<dyn FullInfoLearner + Send> = match spec.algorithm {
        LearnerAlgorithm::ExpWeights => match spec.eta {
            Some(eta) => Box::new(ExpWeights::new(arms, eta)?),
            None => Box::new(ExpWeights::tuned(arms, horizon, 1.0)?),
        },
        LearnerAlgorithm::BlumMansour => {
            let eta = spec
                .eta
                .unwrap_or_else(|| ((arms as f64).ln() / horizon as f64).sqrt());
            Box::new(BlumMansour::new(arms, eta)?)
        }
        LearnerAlgorithm::TreeSwap => {
            let depth = spec.depth.unwrap_or(2);
            let config = TreeSwapConfig::for_horizon(depth, horizon)?;
            let eta = spec.eta;
            let steps = config.branching;
            let base = Box::new(move |_period: usize| match eta {
                Some(e) => ExpWeights::new(arms, e).expect("validated eta"),
                None => ExpWeights::tuned(arms, steps, 1.0).expect("positive steps"),
            });
            Box::new(TreeSwap::new(base, config)?)
        }
        _ => return Err(anyhow!("not a full-information algorithm")),
    };
    Ok(learner)
}

/// Inner regret bound used for both epsilon selection and the reported
/// analytic bound of the bandit reduction.
pub fn inner_bound(spec: &LearnerSpec, arms: usize, horizon: usize) -> Result<f64> {
    Ok(match spec.algorithm {
        LearnerAlgorithm::MonoBanditMw => regret::bound_exp_weights(horizon, arms, 1.0),
        LearnerAlgorithm::MonoBanditTreeswap => {
            let depth = spec.depth.unwrap_or(2);
            let config = TreeSwapConfig::for_horizon(depth, horizon)?;
            regret::bound_tree_swap(horizon, arms, depth, config.branching)
        }
        _ => return Err(anyhow!("not a bandit reduction")),
    })
}

pub fn bandit_learner(
    spec: &LearnerSpec,
    arms: usize,
    horizon: usize,
) -> Result<MonoBandit<Box<dyn FullInfoLearner + Send>>> {
    let bound = inner_bound(spec, arms, horizon)?;
    let epsilon = match spec.epsilon {
        Some(e) => e,
        None => choose_epsilon(horizon, arms, bound)?,
    };
    let inner_range =
        MonoBandit::<Box<dyn FullInfoLearner + Send>>::inner_range(arms, epsilon, LossRange::UNIT);
    let width = inner_range.width().max(1.0);
    let inner: Box<dyn FullInfoLearner + Send> = match spec.algorithm {
        LearnerAlgorithm::MonoBanditMw => match spec.eta {
            Some(eta) => Box::new(ExpWeights::new(arms, eta)?),
            None => Box::new(ExpWeights::tuned(arms, horizon, width)?),
        },
        LearnerAlgorithm::MonoBanditTreeswap => {
            let depth = spec.depth.unwrap_or(2);
            let config = TreeSwapConfig::for_horizon(depth, horizon)?;
            let steps = config.branching;
            let eta = spec.eta;
            let base = Box::new(move |period: usize| match eta {
                Some(e) => ExpWeights::new(arms, e).expect("validated eta"),
                None => {
                    let level_width =
                        agentsel_core::bandit::averaged_estimate_width(arms, epsilon, period);
                    ExpWeights::tuned(arms, steps, level_width).expect("positive steps")
                }
            });
            Box::new(TreeSwap::new(base, config)?)
        }
        _ => return Err(anyhow!("not a bandit reduction")),
    };
    Ok(MonoBandit::new(inner, epsilon, LossRange::UNIT)?)
}

/// One seeded replicate of the bench; exposed for the acceptance suite.
pub fn run_one(
    spec: &LearnerSpec,
    bench: &BenchSpec,
    seed: u64,
    config_hash: &str,
) -> Result<RunRecord> {
    let adversary = make_adversary(bench.suite, seed, bench.arms);
    let outcome: RunOutcome = if spec.algorithm.is_bandit() {
        let mut learner = bandit_learner(spec, bench.arms, bench.horizon)?;
        let mut rng_b = SeededRng::new(seed, StreamId::EXPLORATION);
        let mut rng_f = SeededRng::new(seed, StreamId::LEARNER);
        run_bandit(
            &mut learner,
            adversary.as_ref(),
            bench.horizon,
            &mut rng_b,
            &mut rng_f,
        )?
    } else {
        let mut learner = full_info_learner(spec, bench.arms, bench.horizon)?;
        let mut rng = SeededRng::new(seed, StreamId::LEARNER);
        run_full_info(learner.as_mut(), adversary.as_ref(), bench.horizon, &mut rng)?
    };

    let mut cum = CumulativeRegret::new(bench.arms);
    let rows: Vec<RoundRow> = outcome
        .plays
        .iter()
        .zip(outcome.losses.iter())
        .enumerate()
        .map(|(t, (&arm, loss_row))| {
            let (ce, cs) = cum.push(arm, loss_row);
            RoundRow {
                round: t,
                arm,
                explore: outcome.explore_flags[t],
                loss_or_return: loss_row[arm],
                payment: 0.0,
                tab: 0.0,
                cum_regret_external: ce,
                cum_regret_swap: cs,
                arm_losses: loss_row.clone(),
            }
        })
        .collect();

    let (external, best_arm) = regret::external_regret(&outcome.plays, &outcome.losses)?;
    let (swap, _) = regret::swap_regret(&outcome.plays, &outcome.losses)?;

    let (bound_external, bound_swap) = bounds_for(spec, bench)?;
    let summary = RunSummary {
        external_regret: external,
        best_fixed_arm: best_arm,
        swap_regret: swap,
        bound_external,
        bound_swap,
        bound_external_satisfied: bound_external.map(|b| external <= b),
        bound_swap_satisfied: bound_swap.map(|b| swap <= b),
        ..Default::default()
    };
    Ok(RunRecord {
        config_hash: config_hash.to_string(),
        seed,
        rows,
        summary,
    })
}

/// Analytic `(external, swap)` bounds appropriate to the algorithm, at unit
/// loss range.
pub fn bounds_for(spec: &LearnerSpec, bench: &BenchSpec) -> Result<(Option<f64>, Option<f64>)> {
    Ok(match spec.algorithm {
        LearnerAlgorithm::ExpWeights => (
            Some(regret::bound_exp_weights(bench.horizon, bench.arms, 1.0)),
            None,
        ),
        LearnerAlgorithm::BlumMansour | LearnerAlgorithm::TreeSwap => (None, None),
        LearnerAlgorithm::MonoBanditMw => {
            let b = regret::bound_mono_bandit(
                bench.horizon,
                bench.arms,
                inner_bound(spec, bench.arms, bench.horizon)?,
            );
            (Some(b), None)
        }
        LearnerAlgorithm::MonoBanditTreeswap => {
            let b = regret::bound_mono_bandit(
                bench.horizon,
                bench.arms,
                inner_bound(spec, bench.arms, bench.horizon)?,
            );
            (None, Some(b))
        }
    })
}

#[derive(Debug, Serialize)]
struct BenchAggregate {
    config_hash: String,
    seeds: Vec<u64>,
    mean_external_regret: f64,
    mean_swap_regret: f64,
    bound_external: Option<f64>,
    bound_swap: Option<f64>,
    mean_bound_external_satisfied: Option<bool>,
    mean_bound_swap_satisfied: Option<bool>,
}

pub fn run(
    config: &ExperimentConfig,
    seeds: &Seeds,
    learner: &LearnerSpec,
    bench: &BenchSpec,
    out_dir: &Path,
) -> Result<ExperimentReport> {
    let hash = config.hash()?;
    let seed_list: Vec<u64> = (0..seeds.replicates as u64)
        .map(|i| seeds.base.wrapping_add(i))
        .collect();
    let mut records: Vec<RunRecord> = seed_list
        .par_iter()
        .map(|&seed| run_one(learner, bench, seed, &hash))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| r.seed);

    for record in &records {
        record.write_json(&out_dir.join(format!("run_seed{}.json", record.seed)))?;
        std::fs::write(
            out_dir.join(format!("run_seed{}.csv", record.seed)),
            record.to_csv(),
        )?;
    }

    let n = records.len() as f64;
    let mean_external = records.iter().map(|r| r.summary.external_regret).sum::<f64>() / n;
    let mean_swap = records.iter().map(|r| r.summary.swap_regret).sum::<f64>() / n;
    let (bound_external, bound_swap) = bounds_for(learner, bench)?;
    let aggregate = BenchAggregate {
        config_hash: hash.clone(),
        seeds: seed_list,
        mean_external_regret: mean_external,
        mean_swap_regret: mean_swap,
        bound_external,
        bound_swap,
        mean_bound_external_satisfied: bound_external.map(|b| mean_external <= b),
        mean_bound_swap_satisfied: bound_swap.map(|b| mean_swap <= b),
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&aggregate)?,
    )?;

    let passed = aggregate.mean_bound_external_satisfied.unwrap_or(true)
        && aggregate.mean_bound_swap_satisfied.unwrap_or(true);
    let mut lines = vec![format!(
        "regret-bench: {} replicates, mean external {:.4}, mean swap {:.4}",
        records.len(),
        mean_external,
        mean_swap
    )];
    if let Some(b) = bound_external {
        lines.push(format!(
            "  external bound {:.4}: {}",
            b,
            if mean_external <= b { "satisfied" } else { "VIOLATED" }
        ));
    }
    if let Some(b) = bound_swap {
        lines.push(format!(
            "  swap bound {:.4}: {}",
            b,
            if mean_swap <= b { "satisfied" } else { "VIOLATED" }
        ));
    }
    Ok(ExperimentReport {
        kind: config.kind_name(),
        config_hash: hash,
        out_dir: out_dir.to_path_buf(),
        passed,
        lines,
    })
}
