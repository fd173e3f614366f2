//! Agent cost functions, beliefs, and effort policies.

use crate::contract::Contract;
use crate::error::{Result, SimError};
use crate::model::OutcomeModel;

const COST_TOL: f64 = 1e-12;

/// Absolute objective tolerance of the myopic solver: efforts within this
/// value of the maximum count as ties and break toward the smaller effort.
pub const MYOPIC_OBJECTIVE_TOL: f64 = 1e-9;

/// Convex, non-decreasing effort cost on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum CostFn {
    Linear { c: f64 },
    Quadratic { gamma: f64 },
    /// Piecewise-linear convex table `(effort, cost)`, efforts strictly
    /// increasing and spanning [0, 1].
    PiecewiseConvex { points: Vec<(f64, f64)> },
}

impl CostFn {
    pub fn linear(c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(SimError::InvalidAgent(format!(
                "linear cost coefficient {c} must be non-negative"
            )));
        }
        Ok(CostFn::Linear { c })
    }

    pub fn quadratic(gamma: f64) -> Result<Self> {
        if gamma < 0.0 {
            return Err(SimError::InvalidAgent(format!(
                "quadratic cost coefficient {gamma} must be non-negative"
            )));
        }
        Ok(CostFn::Quadratic { gamma })
    }

    pub fn piecewise_convex(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 || points.first().unwrap().0 > 0.0 || points.last().unwrap().0 < 1.0 {
            return Err(SimError::InvalidAgent(
                "cost table must span efforts [0, 1]".into(),
            ));
        }
        if points[0].1 < 0.0 {
            return Err(SimError::InvalidAgent("cost(0) must be non-negative".into()));
        }
        let mut prev_slope = f64::NEG_INFINITY;
        for w in points.windows(2) {
            let (a0, c0) = w[0];
            let (a1, c1) = w[1];
            if a1 <= a0 {
                return Err(SimError::InvalidAgent(
                    "cost table efforts must strictly increase".into(),
                ));
            }
            let slope = (c1 - c0) / (a1 - a0);
            if slope < -COST_TOL {
                return Err(SimError::InvalidAgent("cost must be non-decreasing".into()));
            }
            // Grid convexity: second differences must not be negative.
            if slope < prev_slope - COST_TOL {
                return Err(SimError::InvalidAgent("cost must be convex".into()));
            }
            prev_slope = slope;
        }
        Ok(CostFn::PiecewiseConvex { points })
    }

    pub fn cost(&self, effort: f64) -> f64 {
        match self {
            CostFn::Linear { c } => c * effort,
            CostFn::Quadratic { gamma } => gamma * effort * effort,
            CostFn::PiecewiseConvex { points } => {
                for w in points.windows(2) {
                    let (a0, c0) = w[0];
                    let (a1, c1) = w[1];
                    if effort <= a1 {
                        return c0 + (effort - a0) * (c1 - c0) / (a1 - a0);
                    }
                }
                points.last().unwrap().1
            }
        }
    }

    /// Interior efforts where the cost's slope changes; candidates for the
    /// myopic maximizer alongside the endpoints.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            CostFn::Linear { .. } | CostFn::Quadratic { .. } => Vec::new(),
            CostFn::PiecewiseConvex { points } => points
                .iter()
                .map(|&(a, _)| a)
                .filter(|&a| a > 0.0 && a < 1.0)
                .collect(),
        }
    }
}

/// What the agent knows about states of nature. Either the realized sequence
/// itself, or a fixed per-round distribution (i.i.d. belief).
#[derive(Debug, Clone, PartialEq)]
pub enum Belief {
    KnownSequence(Vec<usize>),
    IidDistribution(Vec<f64>),
}

impl Belief {
    /// Marginal over states for round `t` (0-based), as weights per state.
    pub fn marginal(&self, t: usize, states: usize) -> Result<Vec<f64>> {
        match self {
            Belief::KnownSequence(seq) => {
                let y = *seq.get(t).ok_or_else(|| {
                    SimError::InvalidAgent(format!(
                        "belief sequence of length {} has no round {t}",
                        seq.len()
                    ))
                })?;
                if y >= states {
                    return Err(SimError::InvalidAgent(format!(
                        "belief state {y} outside alphabet of size {states}"
                    )));
                }
                let mut m = vec![0.0; states];
                m[y] = 1.0;
                Ok(m)
            }
            Belief::IidDistribution(d) => {
                if d.len() != states {
                    return Err(SimError::InvalidAgent(format!(
                        "belief distribution covers {} states, model has {states}",
                        d.len()
                    )));
                }
                let sum: f64 = d.iter().sum();
                if d.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(SimError::InvalidAgent(
                        "belief distribution must be a probability vector".into(),
                    ));
                }
                Ok(d.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub cost: CostFn,
    pub belief: Belief,
}

/// Effort rule layered on the myopic solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Myopic,
    /// Plays `min(1, myopic + delta)`; models equilibrium over-exertion.
    Boosted(f64),
    Fixed(f64),
}

impl PolicyKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            PolicyKind::Boosted(delta) if *delta < 0.0 => Err(SimError::InvalidAgent(format!(
                "boost delta {delta} must be non-negative"
            ))),
            PolicyKind::Fixed(a) if !(0.0..=1.0).contains(a) => Err(SimError::InvalidAgent(
                format!("fixed effort {a} outside [0, 1]"),
            )),
            _ => Ok(()),
        }
    }
}

/// The myopic objective `E_y[ expected payment ] - cost(effort)`; the
/// payment expectation is affine in effort, so with a convex cost the
/// objective is concave.
fn myopic_objective(
    model: &OutcomeModel,
    contract: &Contract,
    agent: usize,
    cost: &CostFn,
    marginal: &[f64],
    effort: f64,
) -> f64 {
    let pay: f64 = marginal
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > 0.0)
        .map(|(y, &p)| {
            p * model.expected_over_outcomes(agent, effort, y, |r| contract.payment(r))
        })
        .sum();
    pay - cost.cost(effort)
}

/// Effort maximizing the single-round expected payoff; ties (within
/// [`MYOPIC_OBJECTIVE_TOL`]) break toward the smallest maximizing effort.
///
/// The objective is affine-minus-convex, so the maximum sits at an endpoint,
/// at a cost breakpoint, or at the quadratic first-order point; all evaluated
/// in closed form.
pub fn myopic_action(
    spec: &AgentSpec,
    model: &OutcomeModel,
    contract: &Contract,
    agent: usize,
    marginal: &[f64],
) -> Result<f64> {
    if agent >= model.agents() {
        return Err(SimError::Config(format!(
            "agent index {agent} out of range for model with {} agents",
            model.agents()
        )));
    }
    if marginal.len() != model.states() {
        return Err(SimError::Config(format!(
            "state marginal covers {} states, model has {}",
            marginal.len(),
            model.states()
        )));
    }

    let mut candidates = vec![0.0, 1.0];
    if let CostFn::Quadratic { gamma } = spec.cost {
        if gamma > 0.0 {
            // Payment slope in effort: difference of the affine objective.
            let pay_slope = myopic_objective(model, contract, agent, &CostFn::Linear { c: 0.0 }, marginal, 1.0)
                - myopic_objective(model, contract, agent, &CostFn::Linear { c: 0.0 }, marginal, 0.0);
            candidates.push((pay_slope / (2.0 * gamma)).clamp(0.0, 1.0));
        }
    }
    candidates.extend(spec.cost.breakpoints());
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();

    let mut best_effort = candidates[0];
    let mut best_value = myopic_objective(model, contract, agent, &spec.cost, marginal, best_effort);
    for &a in &candidates[1..] {
        let v = myopic_objective(model, contract, agent, &spec.cost, marginal, a);
        if v > best_value + MYOPIC_OBJECTIVE_TOL {
            best_value = v;
            best_effort = a;
        }
    }
    Ok(best_effort)
}

/// Effort played by a policy kind this round.
pub fn effort_for_round(
    kind: PolicyKind,
    spec: &AgentSpec,
    model: &OutcomeModel,
    contract: &Contract,
    agent: usize,
    marginal: &[f64],
) -> Result<f64> {
    kind.validate()?;
    match kind {
        PolicyKind::Myopic => myopic_action(spec, model, contract, agent, marginal),
        PolicyKind::Boosted(delta) => {
            let base = myopic_action(spec, model, contract, agent, marginal)?;
            Ok((base + delta).min(1.0))
        }
        PolicyKind::Fixed(a) => Ok(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn effort_model() -> OutcomeModel {
        // One state, returns {0, 1}, P(high) = effort.
        OutcomeModel::two_outcome(0.0, 1.0, vec![vec![1.0]], vec![vec![0.0]]).unwrap()
    }

    fn spec(cost: CostFn) -> AgentSpec {
        AgentSpec {
            cost,
            belief: Belief::IidDistribution(vec![1.0]),
        }
    }

    #[test]
    fn linear_cost_hits_endpoints() {
        let model = effort_model();
        let contract = Contract::linear(0.5).unwrap();
        // alpha * M = 0.5 > c = 0.2: full effort.
        let a = myopic_action(&spec(CostFn::linear(0.2).unwrap()), &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(a, 1.0);
        // alpha * M = 0.5 < c = 0.9: zero effort.
        let a = myopic_action(&spec(CostFn::linear(0.9).unwrap()), &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn quadratic_cost_first_order_point() {
        // alpha * M = 0.6, gamma = 0.5: a* = 0.6 / (2 * 0.5) = 0.6.
        let model = effort_model();
        let contract = Contract::linear(0.6).unwrap();
        let a = myopic_action(
            &spec(CostFn::quadratic(0.5).unwrap()),
            &model,
            &contract,
            0,
            &[1.0],
        )
        .unwrap();
        assert_abs_diff_eq!(a, 0.6, epsilon = 1e-12);

        // Cross-check against a fine grid search.
        let s = spec(CostFn::quadratic(0.5).unwrap());
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=1_000_000 {
            let x = i as f64 * 1e-6;
            let v = myopic_objective(&model, &contract, 0, &s.cost, &[1.0], x);
            if v > best.1 {
                best = (x, v);
            }
        }
        assert_abs_diff_eq!(a, best.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_share_means_zero_effort() {
        let model = effort_model();
        let contract = Contract::linear(0.0).unwrap();
        let a = myopic_action(&spec(CostFn::linear(0.3).unwrap()), &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(a, 0.0);
        let a = myopic_action(
            &spec(CostFn::quadratic(0.4).unwrap()),
            &model,
            &contract,
            0,
            &[1.0],
        )
        .unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn ties_break_to_smallest_effort() {
        // alpha * M exactly equals c: the objective is flat, pick zero.
        let model = effort_model();
        let contract = Contract::linear(0.5).unwrap();
        let a = myopic_action(&spec(CostFn::linear(0.5).unwrap()), &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn piecewise_cost_breakpoint_optimum() {
        // Slope 0.1 below effort 0.5, slope 0.9 above; payment slope 0.5
        // lands the optimum exactly on the kink.
        let cost = CostFn::piecewise_convex(vec![(0.0, 0.0), (0.5, 0.05), (1.0, 0.5)]).unwrap();
        let model = effort_model();
        let contract = Contract::linear(0.5).unwrap();
        let a = myopic_action(&spec(cost), &model, &contract, 0, &[1.0]).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn boosted_dominates_myopic_and_clamps() {
        let model = effort_model();
        let contract = Contract::linear(0.6).unwrap();
        let s = spec(CostFn::quadratic(0.5).unwrap());
        let base = effort_for_round(PolicyKind::Myopic, &s, &model, &contract, 0, &[1.0]).unwrap();
        let b0 = effort_for_round(PolicyKind::Boosted(0.0), &s, &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(base, b0);
        let b1 = effort_for_round(PolicyKind::Boosted(1.0), &s, &model, &contract, 0, &[1.0]).unwrap();
        assert_eq!(b1, 1.0);
        let b = effort_for_round(PolicyKind::Boosted(0.1), &s, &model, &contract, 0, &[1.0]).unwrap();
        assert!(b >= base);
    }

    #[test]
    fn cost_validation() {
        assert!(CostFn::linear(-0.1).is_err());
        assert!(CostFn::quadratic(-1.0).is_err());
        assert!(CostFn::piecewise_convex(vec![(0.0, 0.0), (1.0, -0.5)]).is_err());
        // Concave table rejected.
        assert!(CostFn::piecewise_convex(vec![(0.0, 0.0), (0.5, 0.4), (1.0, 0.5)]).is_err());
        // Convex table accepted.
        assert!(CostFn::piecewise_convex(vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.5)]).is_ok());
    }
}
