//! Distribution-level monotonicity suites and empirical regret-growth checks
//! at module-test scale (the acceptance suite reruns the full-size versions).

use agentsel_core::adversary::IidSuite;
use agentsel_core::learners::{
    BlumMansour, ExpWeights, FullInfoLearner, TreeSwap, TreeSwapConfig,
};
use agentsel_core::monotone::{check_full_info, random_pair};
use agentsel_core::regret::{bound_exp_weights, swap_regret};
use agentsel_core::rng::{SeededRng, StreamId};
use agentsel_core::runner::run_full_info;

fn ew_factory(k: usize, eta: f64) -> impl Fn() -> Box<dyn FullInfoLearner + Send> {
    move || Box::new(ExpWeights::new(k, eta).unwrap()) as Box<dyn FullInfoLearner + Send>
}

fn tree_factory(
    k: usize,
    eta: f64,
    horizon: usize,
) -> impl Fn() -> Box<dyn FullInfoLearner + Send> {
    move || {
        let config = TreeSwapConfig::for_horizon(2, horizon).unwrap();
        let base = Box::new(move |_period: usize| ExpWeights::new(k, eta).unwrap());
        Box::new(TreeSwap::new(base, config).unwrap()) as Box<dyn FullInfoLearner + Send>
    }
}

#[test]
fn exp_weights_monotone_on_random_pairs() {
    for seed in 0..200u64 {
        let pair = random_pair(seed, 60, 5);
        let k = pair.arms();
        let verdict = check_full_info(&ew_factory(k, 0.3), &pair, 1e-10).unwrap();
        assert!(
            verdict.monotone,
            "seed {seed}: violations {:?}",
            verdict.violating_rounds
        );
    }
}

#[test]
fn tree_swap_monotone_on_random_pairs() {
    for seed in 0..100u64 {
        let pair = random_pair(seed, 40, 4);
        let k = pair.arms();
        let horizon = pair.horizon();
        let verdict = check_full_info(&tree_factory(k, 0.4, horizon), &pair, 1e-10).unwrap();
        assert!(
            verdict.monotone,
            "seed {seed}: violations {:?}",
            verdict.violating_rounds
        );
    }
}

#[test]
fn exp_weights_empirical_regret_within_bound() {
    // Range-scaled sqrt(ln(k) T) bound with 5% slack at T = 1e4.
    for (seed, k) in [(1u64, 3usize), (2, 5)] {
        let horizon = 10_000;
        let adversary = IidSuite::new(seed, k);
        let mut learner = ExpWeights::tuned(k, horizon, 1.0).unwrap();
        let mut rng = SeededRng::new(seed, StreamId::LEARNER);
        let out = run_full_info(&mut learner, &adversary, horizon, &mut rng).unwrap();
        let (ext, _) = agentsel_core::regret::external_regret(&out.plays, &out.losses).unwrap();
        let bound = 1.05 * bound_exp_weights(horizon, k, 1.0);
        assert!(
            ext <= bound,
            "seed {seed} k {k}: regret {ext} over bound {bound}"
        );
    }
}

#[test]
fn blum_mansour_swap_regret_grows_sublinearly() {
    // Doubling ratio below 1.9 on i.i.d. suites with horizon-tuned eta,
    // on doublings reaching T = 1e5.
    let k = 3;
    let mut previous: Option<f64> = None;
    for &horizon in &[12_500usize, 25_000, 50_000, 100_000] {
        let mut total = 0.0;
        let seeds = 5;
        for seed in 0..seeds {
            let adversary = IidSuite::new(1000 + seed, k);
            let eta = ((k as f64).ln() / horizon as f64).sqrt();
            let mut learner = BlumMansour::new(k, eta).unwrap();
            let mut rng = SeededRng::new(seed, StreamId::LEARNER);
            let out = run_full_info(&mut learner, &adversary, horizon, &mut rng).unwrap();
            let (swap, _) = swap_regret(&out.plays, &out.losses).unwrap();
            total += swap.max(1.0);
        }
        let mean = total / seeds as f64;
        if let Some(prev) = previous {
            let ratio = mean / prev;
            assert!(
                ratio < 1.9,
                "horizon {horizon}: doubling ratio {ratio} (prev {prev}, mean {mean})"
            );
        }
        previous = Some(mean);
    }
}
