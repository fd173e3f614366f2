//! Policy-regret evaluation: realized principal utility against the best
//! counterfactual constant selection with a myopically-playing agent.

use crate::agent::myopic_action;
use crate::contract::Contract;
use crate::error::{Result, SimError};
use crate::game::{AgentConfig, GameTranscript};
use crate::model::OutcomeModel;

/// Expected total principal utility of the constant mechanism selecting
/// `agent` every round on the given state sequence, with the agent playing
/// the smallest myopic-optimal effort under their own belief. The expectation
/// over outcome draws is exact via the affine model.
pub fn benchmark_constant_utility(
    model: &OutcomeModel,
    contract: &Contract,
    agents: &[AgentConfig],
    states: &[usize],
    agent: usize,
) -> Result<f64> {
    if agent >= agents.len() {
        return Err(SimError::Config(format!(
            "benchmark agent {agent} out of range"
        )));
    }
    let spec = &agents[agent].spec;
    let mut total = 0.0;
    for (t, &y) in states.iter().enumerate() {
        let marginal = spec.belief.marginal(t, model.states())?;
        let effort = myopic_action(spec, model, contract, agent, &marginal)?;
        let expected_return = model.expected_return(agent, effort, y);
        let expected_payment =
            model.expected_over_outcomes(agent, effort, y, |r| contract.payment(r));
        total += expected_return - expected_payment;
    }
    Ok(total)
}

/// `max_i benchmark_i - realized`: the gap between the best constant
/// selection benchmark over agents and the transcript's settled utility.
pub fn policy_regret(
    transcript: &GameTranscript,
    model: &OutcomeModel,
    contract: &Contract,
    agents: &[AgentConfig],
    states: &[usize],
) -> Result<f64> {
    if transcript.horizon() != states.len() {
        return Err(SimError::Config(format!(
            "transcript has {} rounds, state sequence {}",
            transcript.horizon(),
            states.len()
        )));
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..agents.len() {
        let b = benchmark_constant_utility(model, contract, agents, states, i)?;
        if b > best {
            best = b;
        }
    }
    Ok(best - transcript.total_principal_utility())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentSpec, Belief, CostFn, PolicyKind};
    use crate::game::play_game1;
    use crate::mechanism::ConstantMechanism;
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic_benchmark_hand_value() {
        // Returns {0, 1}, P(high) = effort, alpha = 0.5, zero cost: myopic
        // effort 1, per-round benchmark utility (1 - alpha) = 0.5.
        let model =
            OutcomeModel::two_outcome(0.0, 1.0, vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        let contract = Contract::linear(0.5).unwrap();
        let agents = vec![AgentConfig {
            spec: AgentSpec {
                cost: CostFn::linear(0.0).unwrap(),
                belief: Belief::IidDistribution(vec![1.0]),
            },
            policy: PolicyKind::Myopic,
        }];
        let states = vec![0usize; 10];
        let b = benchmark_constant_utility(&model, &contract, &agents, &states, 0).unwrap();
        assert_abs_diff_eq!(b, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_mechanism_on_deterministic_model_has_zero_policy_regret() {
        // Deterministic outcomes (probability one of the high outcome at any
        // effort makes realized = expected), single agent, constant selection.
        let model =
            OutcomeModel::two_outcome(0.0, 1.0, vec![vec![0.0]], vec![vec![1.0]]).unwrap();
        let contract = Contract::linear(0.3).unwrap();
        let agents = vec![AgentConfig {
            spec: AgentSpec {
                cost: CostFn::linear(0.0).unwrap(),
                belief: Belief::IidDistribution(vec![1.0]),
            },
            policy: PolicyKind::Myopic,
        }];
        let states = vec![0usize; 25];
        let mut mech = ConstantMechanism::new(0, 2).unwrap();
        let t = play_game1(&mut mech, &model, &contract, &agents, &states, 9).unwrap();
        let pr = policy_regret(&t, &model, &contract, &agents, &states).unwrap();
        assert_abs_diff_eq!(pr, 0.0, epsilon = 1e-9);
    }
}
