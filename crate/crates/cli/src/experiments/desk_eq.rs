//! Desk-scale structural checks on tiny enumerable games.

use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use agentsel_core::rng::{SeededRng, StreamId};
use agentsel_sim::desk::{
    check_myopic_under_constant, check_subgame_decomposition, exact_utility,
    monte_carlo_utility, random_myopic_spec, random_tiny_spec, reachable_prefixes,
    round_zero_best_response, Deviation, GridPolicy,
};

use crate::config::{DeskSpec, ExperimentConfig, Seeds};
use crate::experiments::ExperimentReport;

#[derive(Debug, Serialize)]
struct DeskReportFile {
    config_hash: String,
    decomposition_checks: usize,
    max_decomposition_residual: f64,
    myopic_checks: usize,
    myopic_failures: usize,
    monte_carlo_checks: usize,
    monte_carlo_failures: usize,
    incentive_checks: usize,
    incentive_failures: usize,
}

fn base_policies(horizon: usize) -> Vec<GridPolicy> {
    vec![
        GridPolicy::constant_per_round(vec![1; horizon]),
        GridPolicy::constant_per_round(vec![1; horizon]),
    ]
}

pub fn run(
    config: &ExperimentConfig,
    seeds: &Seeds,
    desk: &DeskSpec,
    out_dir: &Path,
) -> Result<ExperimentReport> {
    let hash = config.hash()?;

    // Subgame decomposition residuals across random specs and deviations.
    let residuals: Vec<f64> = (0..desk.specs as u64)
        .into_par_iter()
        .map(|i| {
            let spec_seed = seeds.base.wrapping_add(i);
            let spec = random_tiny_spec(spec_seed, i % 2 == 0);
            let policies = base_policies(spec.horizon);
            let prefixes = reachable_prefixes(&spec);
            let mut rng = SeededRng::new(spec_seed, StreamId::ADVERSARY.offset(9));
            let mut worst: f64 = 0.0;
            for _ in 0..desk.deviations_per_spec {
                let (round, prefix) = prefixes[rng.next_index(prefixes.len())].clone();
                let agent = rng.next_index(2);
                let new_choice = rng.next_index(spec.effort_grid.len());
                let deviation = Deviation {
                    agent,
                    round,
                    prefix,
                    new_choice,
                };
                let r = check_subgame_decomposition(&spec, &policies, &deviation)
                    .map_err(anyhow::Error::from)?;
                worst = worst.max(r);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);

    // Myopic optimality under constant selection (full policy enumeration).
    let myopic_outcomes: Vec<bool> = (0..desk.specs as u64)
        .into_par_iter()
        .map(|i| {
            let spec = random_myopic_spec(seeds.base.wrapping_add(i), 0);
            let policies = base_policies(spec.horizon);
            let check = check_myopic_under_constant(&spec, &policies, 0)
                .map_err(anyhow::Error::from)?;
            Ok(check.holds(1e-12))
        })
        .collect::<Result<Vec<_>>>()?;
    let myopic_failures = myopic_outcomes.iter().filter(|ok| !**ok).count();

    // Exact enumeration against Monte Carlo (3 standard errors).
    let mc_specs = desk.specs.min(5);
    let mc_outcomes: Vec<bool> = (0..mc_specs as u64)
        .into_par_iter()
        .map(|i| {
            let spec = random_tiny_spec(seeds.base.wrapping_add(i), i % 2 == 0);
            let policies = base_policies(spec.horizon);
            for agent in 0..2 {
                let exact = exact_utility(&spec, &policies, agent)?;
                let (mc, se) =
                    monte_carlo_utility(&spec, &policies, agent, desk.monte_carlo_samples, 17)?;
                if (exact - mc).abs() > 3.0 * se.max(1e-7) {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<_>>>()?;
    let mc_failures = mc_outcomes.iter().filter(|ok| !**ok).count();

    // Round-one best response at least the myopic grid effort under the
    // tabulated monotone (greedy) mechanism.
    let incentive_outcomes: Vec<bool> = (0..desk.specs as u64)
        .into_par_iter()
        .map(|i| {
            let spec = random_tiny_spec(seeds.base.wrapping_add(i), true);
            let policies = base_policies(spec.horizon);
            let (br, myopic) = round_zero_best_response(&spec, &policies, 0)?;
            let min_br = br.iter().min().copied().unwrap_or(0);
            let min_my = myopic.iter().min().copied().unwrap_or(0);
            Ok(min_br >= min_my)
        })
        .collect::<Result<Vec<_>>>()?;
    let incentive_failures = incentive_outcomes.iter().filter(|ok| !**ok).count();

    let file = DeskReportFile {
        config_hash: hash.clone(),
        decomposition_checks: desk.specs * desk.deviations_per_spec,
        max_decomposition_residual: max_residual,
        myopic_checks: myopic_outcomes.len(),
        myopic_failures,
        monte_carlo_checks: mc_outcomes.len(),
        monte_carlo_failures: mc_failures,
        incentive_checks: incentive_outcomes.len(),
        incentive_failures,
    };
    std::fs::write(
        out_dir.join("desk_report.json"),
        serde_json::to_string_pretty(&file)?,
    )?;

    let passed = max_residual <= desk.residual_tolerance
        && myopic_failures == 0
        && mc_failures == 0
        && incentive_failures == 0;
    let lines = vec![
        format!(
            "desk-eq: {} decomposition checks, max residual {:.3e} (tol {:.1e})",
            file.decomposition_checks, max_residual, desk.residual_tolerance
        ),
        format!(
            "  myopic-under-constant: {}/{} ok; exact-vs-MC: {}/{} ok; incentive: {}/{} ok",
            file.myopic_checks - myopic_failures,
            file.myopic_checks,
            file.monte_carlo_checks - mc_failures,
            file.monte_carlo_checks,
            file.incentive_checks - incentive_failures,
            file.incentive_checks
        ),
    ];
    Ok(ExperimentReport {
        kind: config.kind_name(),
        config_hash: hash,
        out_dir: out_dir.to_path_buf(),
        passed,
        lines,
    })
}
