//! Game-level properties at module-test scale: liability floor, the
//! game-1/game-2 utility sandwich, and boosted-vs-myopic policy regret on
//! paired seeds. The acceptance suite reruns these at full size.

use agentsel_core::regret::{bound_mono_bandit, bound_tree_swap, swap_regret};
use agentsel_core::learners::TreeSwapConfig;
use agentsel_sim::{
    play_game1, play_game2, policy_regret, AgentConfig, AgentSpec, BackingLearner,
    BanditMechanism, Belief, Contract, CostFn, OutcomeModel, PolicyKind,
};

fn dominant_pair_model() -> OutcomeModel {
    // One state; agent 0 strictly dominates agent 1 at every effort.
    OutcomeModel::two_outcome(
        0.0,
        1.0,
        vec![vec![0.55], vec![0.2]],
        vec![vec![0.4], vec![0.1]],
    )
    .unwrap()
}

fn agents(policy: PolicyKind, horizon: usize) -> Vec<AgentConfig> {
    vec![
        AgentConfig {
            spec: AgentSpec {
                cost: CostFn::quadratic(0.3).unwrap(),
                belief: Belief::KnownSequence(vec![0; horizon]),
            },
            policy,
        },
        AgentConfig {
            spec: AgentSpec {
                cost: CostFn::quadratic(0.5).unwrap(),
                belief: Belief::KnownSequence(vec![0; horizon]),
            },
            policy,
        },
    ]
}

#[test]
fn liability_floor_and_tab_pairing() {
    let model = dominant_pair_model();
    let contract = Contract::linear(0.5).unwrap();
    let horizon = 2_000;
    let states = vec![0usize; horizon];
    let arms = 3;
    let depth = 2;
    let branching = TreeSwapConfig::for_horizon(depth, horizon).unwrap().branching;
    let inner_bound = bound_tree_swap(horizon, arms, depth, branching);
    let floor = -0.5 * bound_mono_bandit(horizon, arms, inner_bound);

    let cfg = agents(PolicyKind::Myopic, horizon);
    let mut tab_sums = [0.0f64; 2];
    let seeds = 10;
    for seed in 0..seeds {
        let mut mech = BanditMechanism::new(
            BackingLearner::TreeSwap { depth },
            arms,
            horizon,
            &contract,
            seed,
            None,
        )
        .unwrap();
        let g2 = play_game2(&mut mech, &model, &contract, &cfg, &states, seed).unwrap();
        for i in 0..2 {
            tab_sums[i] += g2.final_tabs.as_ref().unwrap()[i];
        }
    }
    for (i, sum) in tab_sums.iter().enumerate() {
        let mean = sum / seeds as f64;
        assert!(
            mean >= floor,
            "agent {i}: mean tab {mean} below floor {floor}"
        );
    }
}

#[test]
fn utility_sandwich_over_seeds() {
    // Limited-liability utility is at least the standard-game utility and at
    // most that plus alpha times the swap-regret bound, in expectation.
    let model = OutcomeModel::two_outcome(
        -0.5,
        1.0,
        vec![vec![0.5], vec![0.2]],
        vec![vec![0.2], vec![0.1]],
    )
    .unwrap();
    let alpha = 0.5;
    let contract = Contract::linear(alpha).unwrap();
    let horizon = 1_000;
    let states = vec![0usize; horizon];
    let cfg = agents(PolicyKind::Myopic, horizon);
    let arms = 3;
    let depth = 2;
    let branching = TreeSwapConfig::for_horizon(depth, horizon).unwrap().branching;
    let sreg_bound = bound_mono_bandit(horizon, arms, bound_tree_swap(horizon, arms, depth, branching));

    let seeds = 30;
    let mut mean_gap = [0.0f64; 2];
    for seed in 0..seeds {
        let mut m1 = BanditMechanism::new(
            BackingLearner::TreeSwap { depth },
            arms,
            horizon,
            &contract,
            seed,
            None,
        )
        .unwrap();
        let g1 = play_game1(&mut m1, &model, &contract, &cfg, &states, seed).unwrap();
        let mut m2 = BanditMechanism::new(
            BackingLearner::TreeSwap { depth },
            arms,
            horizon,
            &contract,
            seed,
            None,
        )
        .unwrap();
        let g2 = play_game2(&mut m2, &model, &contract, &cfg, &states, seed).unwrap();
        for i in 0..2 {
            let u1 = g1.agent_total_utility(i, &cfg);
            let u2 = g2.agent_total_utility(i, &cfg);
            mean_gap[i] += (u2 - u1) / seeds as f64;
        }
    }
    for (i, gap) in mean_gap.iter().enumerate() {
        assert!(
            *gap >= -1e-9,
            "agent {i}: limited-liability mean utility below standard-game utility ({gap})"
        );
        assert!(
            *gap <= alpha * sreg_bound,
            "agent {i}: mean gap {gap} above alpha * bound {}",
            alpha * sreg_bound
        );
    }
}

#[test]
fn boosted_agents_never_increase_policy_regret_on_paired_seeds() {
    let model = dominant_pair_model();
    let contract = Contract::linear(0.5).unwrap();
    let horizon = 1_500;
    let states = vec![0usize; horizon];
    for delta in [0.05, 0.1] {
        for seed in 0..10u64 {
            let mut regrets = Vec::new();
            for policy in [PolicyKind::Myopic, PolicyKind::Boosted(delta)] {
                let cfg = agents(policy, horizon);
                let mut mech = BanditMechanism::new(
                    BackingLearner::ExpWeights,
                    3,
                    horizon,
                    &contract,
                    seed,
                    None,
                )
                .unwrap();
                let t = play_game1(&mut mech, &model, &contract, &cfg, &states, seed).unwrap();
                // The benchmark side always uses myopic play.
                let bench_cfg = agents(PolicyKind::Myopic, horizon);
                regrets.push(policy_regret(&t, &model, &contract, &bench_cfg, &states).unwrap());
            }
            assert!(
                regrets[1] <= regrets[0] + 1e-9,
                "delta {delta} seed {seed}: boosted {} vs myopic {}",
                regrets[1],
                regrets[0]
            );
        }
    }
}

#[test]
fn principal_utility_beats_benchmark_minus_bound() {
    // One zero-cost agent with deterministic return 1 at effort 1, plus the
    // outside option: realized principal utility stays above
    // (1 - alpha) * T minus the closed-form regret rate (in utility units,
    // one unit of loss spans two of utility).
    let model = OutcomeModel::two_outcome(0.0, 1.0, vec![vec![1.0]], vec![vec![0.0]]).unwrap();
    let alpha = 0.5;
    let contract = Contract::linear(alpha).unwrap();
    let horizon = 10_000;
    let states = vec![0usize; horizon];
    let cfg = vec![AgentConfig {
        spec: AgentSpec {
            cost: CostFn::linear(0.0).unwrap(),
            belief: Belief::KnownSequence(states.clone()),
        },
        policy: PolicyKind::Myopic,
    }];
    let arms = 2;
    let bound = 2.0
        * agentsel_core::regret::bound_mono_bandit_mw(horizon, arms);
    let mut mean_utility = 0.0;
    let seeds = 10;
    for seed in 0..seeds {
        let mut mech = BanditMechanism::new(
            BackingLearner::ExpWeights,
            arms,
            horizon,
            &contract,
            seed,
            None,
        )
        .unwrap();
        let t = play_game1(&mut mech, &model, &contract, &cfg, &states, seed).unwrap();
        mean_utility += t.total_principal_utility() / seeds as f64;
    }
    let floor = (1.0 - alpha) * horizon as f64 - bound;
    assert!(
        mean_utility >= floor,
        "mean utility {mean_utility:.1} below {floor:.1}"
    );
}

#[test]
fn realized_regret_of_learner_mechanism_is_sublinear_sanity() {
    // The mechanism's arm-loss external regret stays well under the horizon.
    let model = dominant_pair_model();
    let contract = Contract::linear(0.5).unwrap();
    let horizon = 2_000;
    let states = vec![0usize; horizon];
    let cfg = agents(PolicyKind::Myopic, horizon);
    let mut mech =
        BanditMechanism::new(BackingLearner::ExpWeights, 3, horizon, &contract, 3, None).unwrap();
    let t = play_game1(&mut mech, &model, &contract, &cfg, &states, 3).unwrap();
    let losses = t.arm_loss_matrix();
    let (ext, best) = agentsel_core::regret::external_regret(&t.plays(), &losses).unwrap();
    assert_eq!(best, 0, "dominant agent should be the hindsight-best arm");
    assert!(ext < 0.25 * horizon as f64, "external regret {ext}");
    let (swap, _) = swap_regret(&t.plays(), &losses).unwrap();
    assert!(swap < 0.3 * horizon as f64, "swap regret {swap}");
}
