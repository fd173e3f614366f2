//! Game simulations over replicate seeds with regret metering, liability
//! accounting, and analytic bound comparison.

use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use agentsel_core::learners::TreeSwapConfig;
use agentsel_core::regret;
use agentsel_sim::{
    play_game1, play_game2, policy_regret, AgentConfig, AgentSpec, BackingLearner,
    BanditMechanism, ConstantMechanism, GameTranscript, SelectionMechanism,
};

use crate::config::{ExperimentConfig, GameSpec, MechanismSpec, Seeds};
use crate::experiments::ExperimentReport;
use crate::record::{CumulativeRegret, RoundRow, RunRecord, RunSummary};

fn build_mechanism(
    spec: &GameSpec,
    seed: u64,
    arms: usize,
) -> Result<Box<dyn SelectionMechanism>> {
    let contract = spec.contract()?;
    Ok(match &spec.mechanism {
        MechanismSpec::Constant { arm } => Box::new(ConstantMechanism::new(*arm, arms)?),
        MechanismSpec::MonoBanditMw { epsilon } => Box::new(BanditMechanism::new(
            BackingLearner::ExpWeights,
            arms,
            spec.horizon,
            &contract,
            seed,
            *epsilon,
        )?),
        MechanismSpec::MonoBanditTreeswap { epsilon, depth } => Box::new(BanditMechanism::new(
            BackingLearner::TreeSwap { depth: *depth },
            arms,
            spec.horizon,
            &contract,
            seed,
            *epsilon,
        )?),
    })
}

/// Swap/external bound of the learner-backed mechanism in loss units, if any.
fn mechanism_bound(spec: &GameSpec, arms: usize) -> Result<Option<f64>> {
    Ok(match &spec.mechanism {
        MechanismSpec::Constant { .. } => None,
        MechanismSpec::MonoBanditMw { .. } => Some(regret::bound_mono_bandit(
            spec.horizon,
            arms,
            regret::bound_exp_weights(spec.horizon, arms, 1.0),
        )),
        MechanismSpec::MonoBanditTreeswap { depth, .. } => {
            let config = TreeSwapConfig::for_horizon(*depth, spec.horizon)?;
            Some(regret::bound_mono_bandit(
                spec.horizon,
                arms,
                regret::bound_tree_swap(spec.horizon, arms, *depth, config.branching),
            ))
        }
    })
}

pub fn agent_configs(spec: &GameSpec, states: &[usize]) -> Result<Vec<AgentConfig>> {
    spec.agent
        .iter()
        .map(|a| {
            Ok(AgentConfig {
                spec: AgentSpec {
                    cost: a.cost.build()?,
                    belief: spec.belief(states),
                },
                policy: a.policy.build(),
            })
        })
        .collect()
}

/// One seeded replicate; exposed for the acceptance suite.
pub fn run_one(
    spec: &GameSpec,
    limited_liability: bool,
    seed: u64,
    config_hash: &str,
) -> Result<(RunRecord, GameTranscript)> {
    let model = spec.model.build()?;
    let contract = spec.contract()?;
    let states = spec.states(seed)?;
    let agents = agent_configs(spec, &states)?;
    let arms = agents.len() + 1;
    let mut mechanism = build_mechanism(spec, seed, arms)?;

    let transcript = if limited_liability {
        play_game2(mechanism.as_mut(), &model, &contract, &agents, &states, seed)?
    } else {
        play_game1(mechanism.as_mut(), &model, &contract, &agents, &states, seed)?
    };

    let mut cum = CumulativeRegret::new(arms);
    let rows: Vec<RoundRow> = transcript
        .rounds
        .iter()
        .map(|r| {
            let (ce, cs) = cum.push(r.selected, &r.arm_losses);
            RoundRow {
                round: r.round,
                arm: r.selected,
                explore: r.explored,
                loss_or_return: r.realized_return,
                payment: r.payment,
                tab: r.tab_after,
                cum_regret_external: ce,
                cum_regret_swap: cs,
                arm_losses: r.arm_losses.clone(),
            }
        })
        .collect();

    let plays = transcript.plays();
    let losses = transcript.arm_loss_matrix();
    let (external, best_arm) = regret::external_regret(&plays, &losses)?;
    let (swap, _) = regret::swap_regret(&plays, &losses)?;
    let bound = mechanism_bound(spec, arms)?;

    let mut benchmark_best = f64::NEG_INFINITY;
    for i in 0..agents.len() {
        let b = agentsel_sim::benchmark_constant_utility(&model, &contract, &agents, &states, i)?;
        benchmark_best = benchmark_best.max(b);
    }
    let pr = policy_regret(&transcript, &model, &contract, &agents, &states)?;

    let summary = RunSummary {
        external_regret: external,
        best_fixed_arm: best_arm,
        swap_regret: swap,
        bound_external: bound,
        bound_swap: bound,
        bound_external_satisfied: bound.map(|b| external <= b),
        bound_swap_satisfied: bound.map(|b| swap <= b),
        total_principal_utility: Some(transcript.total_principal_utility()),
        benchmark_best: Some(benchmark_best),
        policy_regret: Some(pr),
        final_tabs: transcript.final_tabs.clone(),
        final_payouts: transcript.final_payouts.clone(),
    };
    let record = RunRecord {
        config_hash: config_hash.to_string(),
        seed,
        rows,
        summary,
    };
    Ok((record, transcript))
}

#[derive(Debug, Serialize)]
struct GameAggregate {
    config_hash: String,
    seeds: Vec<u64>,
    mean_policy_regret: f64,
    mean_external_regret: f64,
    mean_swap_regret: f64,
    mechanism_bound: Option<f64>,
    mean_final_tabs: Option<Vec<f64>>,
    liability_floor: Option<f64>,
    liability_floor_satisfied: Option<bool>,
}

pub fn run(
    config: &ExperimentConfig,
    seeds: &Seeds,
    game: &GameSpec,
    limited_liability: bool,
    out_dir: &Path,
) -> Result<ExperimentReport> {
    let hash = config.hash()?;
    let seed_list: Vec<u64> = (0..seeds.replicates as u64)
        .map(|i| seeds.base.wrapping_add(i))
        .collect();
    let mut records: Vec<RunRecord> = seed_list
        .par_iter()
        .map(|&seed| run_one(game, limited_liability, seed, &hash).map(|(r, _)| r))
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
    let mean_pr = records
        .iter()
        .filter_map(|r| r.summary.policy_regret)
        .sum::<f64>()
        / n;
    let mean_external = records.iter().map(|r| r.summary.external_regret).sum::<f64>() / n;
    let mean_swap = records.iter().map(|r| r.summary.swap_regret).sum::<f64>() / n;
    let bound = mechanism_bound(game, game.agent.len() + 1)?;

    let (mean_tabs, floor, floor_ok) = if limited_liability {
        let agents = game.agent.len();
        let mut sums = vec![0.0f64; agents];
        for r in &records {
            if let Some(tabs) = &r.summary.final_tabs {
                for (s, &t) in sums.iter_mut().zip(tabs.iter()) {
                    *s += t;
                }
            }
        }
        let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let alpha = game.alpha.unwrap_or(0.0);
        let floor = bound.map(|b| -alpha * b);
        let ok = floor.map(|f| means.iter().all(|&m| m >= f));
        (Some(means), floor, ok)
    } else {
        (None, None, None)
    };

    let aggregate = GameAggregate {
        config_hash: hash.clone(),
        seeds: seed_list,
        mean_policy_regret: mean_pr,
        mean_external_regret: mean_external,
        mean_swap_regret: mean_swap,
        mechanism_bound: bound,
        mean_final_tabs: mean_tabs.clone(),
        liability_floor: floor,
        liability_floor_satisfied: floor_ok,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&aggregate)?,
    )?;

    let passed = floor_ok.unwrap_or(true);
    let mut lines = vec![format!(
        "{}: {} replicates, mean policy regret {:.4}, mean swap regret {:.4}",
        config.kind_name(),
        records.len(),
        mean_pr,
        mean_swap
    )];
    if let (Some(means), Some(f)) = (&mean_tabs, floor) {
        lines.push(format!(
            "  mean final tabs {:?} against liability floor {:.4}: {}",
            means,
            f,
            if passed { "satisfied" } else { "VIOLATED" }
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
