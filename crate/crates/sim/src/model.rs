//! Affine outcome model: per (agent, outcome, state) the outcome probability
//! is `slope * effort + intercept`, outcomes carry returns in [-1, 1], and
//! for every (agent, state) higher effort means weakly higher expected
//! return.

use crate::error::{Result, SimError};

/// Tolerance for probability-sum and range checks at model construction.
const MODEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OutcomeModel {
    returns: Vec<f64>,
    /// `slopes[agent][outcome][state]`
    slopes: Vec<Vec<Vec<f64>>>,
    /// `intercepts[agent][outcome][state]`
    intercepts: Vec<Vec<Vec<f64>>>,
    /// Outcome indices ordered by ascending return; sampling walks this order
    /// so that (for two-outcome models) the same uniform draw maps higher
    /// effort to a weakly higher realized return.
    return_order: Vec<usize>,
}

impl OutcomeModel {
    pub fn new(
        returns: Vec<f64>,
        slopes: Vec<Vec<Vec<f64>>>,
        intercepts: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let m = returns.len();
        if m == 0 {
            return Err(SimError::InvalidModel("no outcomes".into()));
        }
        for (o, &r) in returns.iter().enumerate() {
            if !(-1.0..=1.0).contains(&r) {
                return Err(SimError::InvalidModel(format!(
                    "return of outcome {o} is {r}, outside [-1, 1]"
                )));
            }
        }
        let k = slopes.len();
        if k == 0 || intercepts.len() != k {
            return Err(SimError::InvalidModel(
                "slope/intercept tensors must cover the same positive number of agents".into(),
            ));
        }
        let states = slopes[0]
            .first()
            .map(|per_state| per_state.len())
            .unwrap_or(0);
        if states == 0 {
            return Err(SimError::InvalidModel("no states of nature".into()));
        }
        for i in 0..k {
            if slopes[i].len() != m || intercepts[i].len() != m {
                return Err(SimError::InvalidModel(format!(
                    "agent {i} tensors must have one row per outcome"
                )));
            }
            for o in 0..m {
                if slopes[i][o].len() != states || intercepts[i][o].len() != states {
                    return Err(SimError::InvalidModel(format!(
                        "agent {i} outcome {o} must cover {states} states"
                    )));
                }
            }
        }

        let model = OutcomeModel {
            return_order: order_by_return(&returns),
            returns,
            slopes,
            intercepts,
        };

        // Affinity makes the endpoint checks sufficient for all efforts.
        for i in 0..k {
            for y in 0..states {
                for &a in &[0.0, 1.0] {
                    let mut sum = 0.0;
                    for o in 0..m {
                        let p = model.slopes[i][o][y] * a + model.intercepts[i][o][y];
                        if !(-MODEL_TOL..=1.0 + MODEL_TOL).contains(&p) {
                            return Err(SimError::InvalidModel(format!(
                                "p(agent {i}, outcome {o}, state {y}) at effort {a} is {p}"
                            )));
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > MODEL_TOL {
                        return Err(SimError::InvalidModel(format!(
                            "outcome probabilities for agent {i}, state {y} sum to {sum} at effort {a}"
                        )));
                    }
                }
                let return_slope: f64 = (0..m)
                    .map(|o| model.slopes[i][o][y] * model.returns[o])
                    .sum();
                if return_slope < -MODEL_TOL {
                    return Err(SimError::InvalidModel(format!(
                        "expected return of agent {i} decreases in effort at state {y} (slope {return_slope})"
                    )));
                }
            }
        }
        Ok(model)
    }

    /// Convenience constructor for two-outcome models: outcome 0 carries
    /// `low_return`, outcome 1 carries `high_return`, and
    /// `P(high | agent i, state y) = slope[i][y] * effort + intercept[i][y]`.
    pub fn two_outcome(
        low_return: f64,
        high_return: f64,
        high_slope: Vec<Vec<f64>>,
        high_intercept: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = high_slope.len();
        if k == 0 || high_intercept.len() != k {
            return Err(SimError::InvalidModel("empty agent set".into()));
        }
        let mut slopes = Vec::with_capacity(k);
        let mut intercepts = Vec::with_capacity(k);
        for i in 0..k {
            let s = &high_slope[i];
            let b = &high_intercept[i];
            if s.len() != b.len() || s.is_empty() {
                return Err(SimError::InvalidModel(format!(
                    "agent {i} slope/intercept state lists differ"
                )));
            }
            let low_s: Vec<f64> = s.iter().map(|v| -v).collect();
            let low_b: Vec<f64> = b.iter().map(|v| 1.0 - v).collect();
            slopes.push(vec![low_s, s.clone()]);
            intercepts.push(vec![low_b, b.clone()]);
        }
        OutcomeModel::new(vec![low_return, high_return], slopes, intercepts)
    }

    pub fn agents(&self) -> usize {
        self.slopes.len()
    }

    pub fn outcomes(&self) -> usize {
        self.returns.len()
    }

    pub fn states(&self) -> usize {
        self.slopes[0][0].len()
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn outcome_return(&self, outcome: usize) -> f64 {
        self.returns[outcome]
    }

    /// Probability of `outcome` for `agent` exerting `effort` at state `y`.
    pub fn outcome_prob(&self, agent: usize, outcome: usize, effort: f64, y: usize) -> f64 {
        let p = self.slopes[agent][outcome][y] * effort + self.intercepts[agent][outcome][y];
        p.clamp(0.0, 1.0)
    }

    /// Expected return, affine in effort.
    pub fn expected_return(&self, agent: usize, effort: f64, y: usize) -> f64 {
        self.return_slope(agent, y) * effort + self.return_intercept(agent, y)
    }

    /// Effort-slope of the expected return (non-negative by construction).
    pub fn return_slope(&self, agent: usize, y: usize) -> f64 {
        (0..self.outcomes())
            .map(|o| self.slopes[agent][o][y] * self.returns[o])
            .sum()
    }

    pub fn return_intercept(&self, agent: usize, y: usize) -> f64 {
        (0..self.outcomes())
            .map(|o| self.intercepts[agent][o][y] * self.returns[o])
            .sum()
    }

    /// Expectation of `f(return)` under the outcome distribution, affine in
    /// effort for any fixed `f` since the probabilities are.
    pub fn expected_over_outcomes(
        &self,
        agent: usize,
        effort: f64,
        y: usize,
        f: impl Fn(f64) -> f64,
    ) -> f64 {
        (0..self.outcomes())
            .map(|o| self.outcome_prob(agent, o, effort, y) * f(self.returns[o]))
            .sum()
    }

    /// Maps a uniform draw to an outcome index by walking outcomes in
    /// ascending-return order.
    pub fn sample_outcome(&self, agent: usize, effort: f64, y: usize, unit: f64) -> usize {
        let mut cum = 0.0;
        for &o in &self.return_order {
            cum += self.outcome_prob(agent, o, effort, y);
            if unit < cum {
                return o;
            }
        }
        *self.return_order.last().expect("at least one outcome")
    }

    /// Cumulative-probability thresholds (in ascending-return order) that the
    /// uniform draw is compared against; exposed for exact enumeration.
    pub fn sampling_thresholds(&self, agent: usize, effort: f64, y: usize) -> Vec<f64> {
        let mut cum = 0.0;
        let mut out = Vec::with_capacity(self.outcomes().saturating_sub(1));
        for &o in self.return_order.iter().take(self.outcomes() - 1) {
            cum += self.outcome_prob(agent, o, effort, y);
            out.push(cum.clamp(0.0, 1.0));
        }
        out
    }

    pub fn return_order(&self) -> &[usize] {
        &self.return_order
    }
}

fn order_by_return(returns: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..returns.len()).collect();
    idx.sort_by(|&a, &b| {
        returns[a]
            .partial_cmp(&returns[b])
            .expect("finite returns")
            .then(a.cmp(&b))
    });
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// One state, two outcomes {0, 1}, P(high) = effort.
    pub fn unit_effort_model(k: usize) -> OutcomeModel {
        OutcomeModel::two_outcome(
            0.0,
            1.0,
            vec![vec![1.0]; k],
            vec![vec![0.0]; k],
        )
        .unwrap()
    }

    #[test]
    fn probabilities_sum_to_one_across_grid() {
        let m = unit_effort_model(2);
        for step in 0..=100 {
            let a = step as f64 / 100.0;
            let sum: f64 = (0..m.outcomes()).map(|o| m.outcome_prob(0, o, a, 0)).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn expected_return_monotone_in_effort_on_grid() {
        let m = OutcomeModel::two_outcome(
            -0.5,
            1.0,
            vec![vec![0.4, 0.2]],
            vec![vec![0.3, 0.5]],
        )
        .unwrap();
        for y in 0..2 {
            let mut prev = f64::NEG_INFINITY;
            for step in 0..=100 {
                let a = step as f64 / 100.0;
                let r = m.expected_return(0, a, y);
                assert!(r >= prev - 1e-12);
                prev = r;
            }
        }
    }

    #[test]
    fn rejects_decreasing_expected_return() {
        // P(high) decreasing in effort flips the return slope negative.
        let err = OutcomeModel::two_outcome(0.0, 1.0, vec![vec![-0.5]], vec![vec![0.7]]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_invalid_probability_range() {
        let err = OutcomeModel::two_outcome(0.0, 1.0, vec![vec![0.8]], vec![vec![0.5]]);
        assert!(err.is_err(), "p(high) at effort 1 would be 1.3");
    }

    #[test]
    fn sampling_couples_effort_to_return() {
        // Same draw, higher effort: realized return never decreases.
        let m = unit_effort_model(1);
        for step in 0..=20 {
            let u = step as f64 / 20.0 * 0.999;
            let lo = m.outcome_return(m.sample_outcome(0, 0.3, 0, u));
            let hi = m.outcome_return(m.sample_outcome(0, 0.8, 0, u));
            assert!(hi >= lo);
        }
    }

    #[test]
    fn sample_matches_thresholds() {
        let m = unit_effort_model(1);
        let th = m.sampling_thresholds(0, 0.4, 0);
        assert_eq!(th.len(), 1);
        assert_abs_diff_eq!(th[0], 0.6, epsilon = 1e-12); // P(low) = 1 - 0.4
        assert_eq!(m.sample_outcome(0, 0.4, 0, 0.59), 0);
        assert_eq!(m.sample_outcome(0, 0.4, 0, 0.61), 1);
    }
}
