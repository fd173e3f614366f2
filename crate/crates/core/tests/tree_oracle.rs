//! Cross-checks the incremental lazy-tree learner against a straight-line
//! reimplementation of the same schedule built from index arithmetic.

use agentsel_core::dist::{Distribution, LossRange, LossVector};
use agentsel_core::learners::{ExpWeights, FullInfoLearner, TreeSwap, TreeSwapConfig};

fn lv(values: Vec<f64>) -> LossVector {
    LossVector::new(values, LossRange::UNIT).unwrap()
}

/// Oracle: recomputes, from scratch each round, the distribution of every
/// active instance directly from the block structure. The level-`j` instance
/// active at 0-based round `t` started at the enclosing multiple of
/// `M^(d-j+1)` and has stepped once per completed period of `M^(d-j)` rounds,
/// each step fed the plain average of that period's losses.
fn oracle_distribution(
    losses: &[Vec<f64>],
    t: usize,
    depth: usize,
    branching: usize,
    k: usize,
    eta: f64,
) -> Vec<f64> {
    let mut mix = vec![0.0f64; k];
    for level in 1..=depth {
        let period = branching.pow((depth - level) as u32);
        let block = period * branching;
        let start = (t / block) * block;
        let steps = (t - start) / period;
        let mut inst = ExpWeights::new(k, eta).unwrap();
        for step in 0..steps {
            let lo = start + step * period;
            let mut avg = vec![0.0f64; k];
            for row in &losses[lo..lo + period] {
                for (a, &v) in avg.iter_mut().zip(row.iter()) {
                    *a += v;
                }
            }
            for a in avg.iter_mut() {
                *a /= period as f64;
            }
            inst.observe(&lv(avg)).unwrap();
        }
        for (m, &p) in mix.iter_mut().zip(inst.current().probs()) {
            *m += p;
        }
    }
    mix.iter().map(|m| m / depth as f64).collect()
}

#[test]
fn tree_matches_straight_line_oracle_on_adversarial_losses() {
    let (k, t, depth, branching, eta) = (2usize, 16usize, 2usize, 4usize, 0.5f64);
    let losses: Vec<Vec<f64>> = (0..t)
        .map(|round| {
            if round % 2 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })
        .collect();

    let config = TreeSwapConfig::new(depth, branching).unwrap();
    let factory = Box::new(move |_period: usize| ExpWeights::new(k, eta).unwrap());
    let mut tree = TreeSwap::new(factory, config).unwrap();

    for round in 0..t {
        let expect = oracle_distribution(&losses, round, depth, branching, k, eta);
        let got: &Distribution = tree.current();
        for arm in 0..k {
            assert!(
                (got.get(arm) - expect[arm]).abs() <= 1e-12,
                "round {round} arm {arm}: tree {} vs oracle {}",
                got.get(arm),
                expect[arm]
            );
        }
        tree.observe(&lv(losses[round].clone())).unwrap();
    }
}

#[test]
fn tree_matches_oracle_on_seeded_random_losses() {
    use agentsel_core::rng::{SeededRng, StreamId};
    for seed in 0..6u64 {
        let mut rng = SeededRng::new(seed, StreamId::ADVERSARY);
        let k = 2 + (seed as usize % 2);
        let (depth, branching) = if seed % 2 == 0 { (2, 3) } else { (3, 2) };
        let t = branching_pow(branching, depth);
        let losses: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..k).map(|_| rng.next_unit()).collect())
            .collect();
        let config = TreeSwapConfig::new(depth, branching).unwrap();
        let eta = 0.7;
        let factory = Box::new(move |_period: usize| ExpWeights::new(k, eta).unwrap());
        let mut tree = TreeSwap::new(factory, config).unwrap();
        for round in 0..t {
            let expect = oracle_distribution(&losses, round, depth, branching, k, eta);
            for arm in 0..k {
                assert!(
                    (tree.current().get(arm) - expect[arm]).abs() <= 1e-12,
                    "seed {seed} round {round} arm {arm}"
                );
            }
            tree.observe(&lv(losses[round].clone())).unwrap();
        }
    }
}

fn branching_pow(m: usize, d: usize) -> usize {
    (0..d).fold(1usize, |acc, _| acc * m)
}
