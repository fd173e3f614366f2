//! Bandit-feedback wrapper around a full-information learner.
//!
//! Each round a single categorical draw from the exploration stream either
//! picks a uniformly random arm (probability `epsilon`, split evenly) or
//! defers to the wrapped learner's distribution. On exploration rounds the
//! wrapped learner is fed the importance-weighted vector `k*b/epsilon` at the
//! explored coordinate and zero elsewhere; on exploitation rounds it is fed
//! the all-zeros vector. The wrapper therefore forwards an unbiased estimate
//! of every loss coordinate while the learner never sees which rounds were
//! exploratory, and the reduction preserves monotonicity of the wrapped
//! learner along with its regret guarantees (at the `2*sqrt(k*T*R(T))` rate).

use crate::dist::{sample, Distribution, LossRange, LossVector};
use crate::error::{CoreError, Result};
use crate::learners::FullInfoLearner;
use crate::rng::SeededRng;

/// Outcome of one bandit round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BanditRound {
    pub arm: usize,
    pub explored: bool,
}

pub struct MonoBandit<L: FullInfoLearner> {
    epsilon: f64,
    feedback_range: LossRange,
    inner: L,
    current: Distribution,
}

impl<L: FullInfoLearner> MonoBandit<L> {
    /// `feedback_range` is the range of the raw bandit losses; the inner
    /// learner must be configured for the widened importance-weighted range
    /// (see [`MonoBandit::inner_range`]).
    pub fn new(inner: L, epsilon: f64, feedback_range: LossRange) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(CoreError::InvalidParameter(format!(
                "epsilon = {epsilon} outside [0, 1]"
            )));
        }
        let current = inner.current().clone();
        Ok(MonoBandit {
            epsilon,
            feedback_range,
            inner,
            current,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Distribution the wrapped learner currently plays (exploitation arm law).
    pub fn inner_distribution(&self) -> &Distribution {
        &self.current
    }

    /// Overall play distribution this round: `epsilon`-uniform mixed with the
    /// inner distribution.
    pub fn play_distribution(&self) -> Distribution {
        let k = self.current.len() as f64;
        let probs: Vec<f64> = self
            .current
            .probs()
            .iter()
            .map(|&p| self.epsilon / k + (1.0 - self.epsilon) * p)
            .collect();
        Distribution::new(probs).expect("convex mixture of distributions")
    }

    pub fn arms(&self) -> usize {
        self.current.len()
    }

    /// Range of the vectors fed to the inner learner for raw losses in
    /// `feedback_range` under exploration probability `epsilon`.
    pub fn inner_range(k: usize, epsilon: f64, feedback_range: LossRange) -> LossRange {
        if epsilon <= 0.0 {
            // Never explores: the inner learner only ever sees zeros.
            return LossRange { lo: 0.0, hi: 0.0 };
        }
        let scale = k as f64 / epsilon;
        LossRange {
            lo: (scale * feedback_range.lo).min(0.0),
            hi: (scale * feedback_range.hi).max(0.0),
        }
    }

    /// Draws this round's arm: one categorical draw from the exploration
    /// stream decides between the uniform arm and the learner's sample.
    pub fn select(&mut self, rng_b: &mut SeededRng, rng_f: &mut SeededRng) -> BanditRound {
        let k = self.arms();
        let u = rng_b.next_unit();
        if u < self.epsilon {
            // u is uniform on [0, epsilon): reuse it to pick the explored arm.
            let idx = ((u / self.epsilon * k as f64) as usize).min(k - 1);
            BanditRound {
                arm: idx,
                explored: true,
            }
        } else {
            BanditRound {
                arm: sample(&self.current, rng_f),
                explored: false,
            }
        }
    }

    /// Feeds back the played arm's realized loss and advances the learner.
    pub fn update(&mut self, round: BanditRound, b: f64) -> Result<()> {
        if !self.feedback_range.contains(b) {
            return Err(CoreError::InvalidLoss(format!(
                "bandit feedback {b} outside declared [{}, {}]",
                self.feedback_range.lo, self.feedback_range.hi
            )));
        }
        let fed = self.estimate_vector(round.arm, round.explored, b);
        self.current = self.inner.observe(&fed)?;
        Ok(())
    }

    /// Plays one round. `feedback` maps the played arm to its realized loss;
    /// only that single value ever reaches the learner side.
    pub fn round(
        &mut self,
        rng_b: &mut SeededRng,
        rng_f: &mut SeededRng,
        feedback: impl FnOnce(usize) -> f64,
    ) -> Result<BanditRound> {
        let round = self.select(rng_b, rng_f);
        let b = feedback(round.arm);
        self.update(round, b)?;
        Ok(round)
    }

    /// The importance-weighted vector recorded for the inner learner.
    pub fn estimate_vector(&self, arm: usize, explored: bool, b: f64) -> LossVector {
        let k = self.arms();
        let mut values = vec![0.0; k];
        if explored {
            values[arm] = k as f64 * b / self.epsilon;
        }
        LossVector::new(
            values,
            Self::inner_range(k, self.epsilon, self.feedback_range),
        )
        .expect("estimate stays in widened range")
    }
}

/// Effective width of period-averaged importance-weighted estimates, for
/// tuning the learning rate of lazily-updated inner instances. A unit-range
/// loss estimated at `k*loss/epsilon` with probability `epsilon/k` has
/// second moment `(k/epsilon) * loss^2`; averaging `period` independent
/// rounds divides it by the period, so the variance-matched scale is
/// `sqrt(k / (epsilon * period))`, clamped between the unit loss range and
/// the worst-case magnitude `k/epsilon`.
pub fn averaged_estimate_width(k: usize, epsilon: f64, period: usize) -> f64 {
    if epsilon <= 0.0 {
        return 1.0;
    }
    let worst = k as f64 / epsilon;
    (worst / period.max(1) as f64).sqrt().clamp(1.0, worst)
}

/// Exploration probability minimizing the reduction's regret bound
/// `(k/eps) * R(T) + eps * T`, clamped to one: `min(1, sqrt(k * R(T) / T))`.
/// With this choice the bound evaluates to at most `2*sqrt(k*T*R(T))`.
pub fn choose_epsilon(horizon: usize, k: usize, inner_bound: f64) -> Result<f64> {
    if horizon == 0 || k == 0 {
        return Err(CoreError::InvalidParameter(
            "horizon and k must be positive".into(),
        ));
    }
    if !(inner_bound >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "inner regret bound {inner_bound} must be non-negative"
        )));
    }
    Ok((k as f64 * inner_bound / horizon as f64).sqrt().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::ExpWeights;
    use crate::rng::StreamId;
    use approx::assert_abs_diff_eq;

    fn make(k: usize, epsilon: f64) -> MonoBandit<ExpWeights> {
        let range = LossRange::UNIT;
        let inner_range = MonoBandit::<ExpWeights>::inner_range(k, epsilon, range);
        let inner = ExpWeights::tuned(k, 1000, inner_range.width().max(1.0)).unwrap();
        MonoBandit::new(inner, epsilon, range).unwrap()
    }

    #[test]
    fn epsilon_zero_never_explores_and_inner_stays_uniform() {
        let mut mb = make(3, 0.0);
        let mut rb = SeededRng::new(1, StreamId::EXPLORATION);
        let mut rf = SeededRng::new(1, StreamId::LEARNER);
        for _ in 0..200 {
            let r = mb.round(&mut rb, &mut rf, |_| 0.9).unwrap();
            assert!(!r.explored);
        }
        // Inner saw only zero vectors, so it still plays uniform.
        for &p in mb.inner_distribution().probs() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn epsilon_one_explores_uniformly() {
        let mut mb = make(2, 1.0);
        let mut rb = SeededRng::new(7, StreamId::EXPLORATION);
        let mut rf = SeededRng::new(7, StreamId::LEARNER);
        let n = 100_000;
        let mut count0 = 0;
        for _ in 0..n {
            let r = mb.round(&mut rb, &mut rf, |_| 0.0).unwrap();
            assert!(r.explored);
            if r.arm == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn estimate_is_unbiased_by_exact_branch_enumeration() {
        // Expectation of the recorded vector over the k+1 branch outcomes of
        // the exploration draw equals the true loss coordinatewise.
        let k = 3;
        for &eps in &[0.1, 0.5, 0.9] {
            let mb = make(k, eps);
            let loss = [0.3, -0.2, 0.8];
            let range = LossRange::new(-1.0, 1.0).unwrap();
            let mb = MonoBandit::new(mb.inner, eps, range).unwrap();
            let mut expectation = vec![0.0f64; k];
            // Explore branches: arm j with probability eps/k.
            for j in 0..k {
                let fed = mb.estimate_vector(j, true, loss[j]);
                for (e, v) in expectation.iter_mut().zip(fed.values()) {
                    *e += eps / k as f64 * v;
                }
            }
            // Exploit branch contributes zeros with probability 1-eps.
            for (i, &l) in loss.iter().enumerate() {
                assert_abs_diff_eq!(expectation[i], l, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn choose_epsilon_matches_hand_arithmetic() {
        // k=3, T=1e4, R(T) = sqrt(ln(3) * 1e4).
        let r = (3.0f64.ln() * 1e4).sqrt();
        let eps = choose_epsilon(10_000, 3, r).unwrap();
        assert_abs_diff_eq!(eps, 0.1773257235119771, epsilon = 1e-10);
        let bound = 2.0 * (3.0 * 1e4 * r).sqrt();
        assert_abs_diff_eq!(bound, 3546.514470239542, epsilon = 1e-6);
        // The plugged-in bound agrees with the closed-form rate within 3%.
        let closed_form = 2.0 * (3.0 * (3.0f64.ln()).sqrt()).sqrt() * 1e4f64.powf(0.75);
        assert!((bound - closed_form).abs() / closed_form < 0.03);
    }

    #[test]
    fn choose_epsilon_edge_cases() {
        assert_eq!(choose_epsilon(100, 3, 0.0).unwrap(), 0.0);
        // k * R >= T clamps to one.
        assert_eq!(choose_epsilon(100, 4, 30.0).unwrap(), 1.0);
        assert!(choose_epsilon(0, 3, 1.0).is_err());
        assert!(choose_epsilon(10, 3, -1.0).is_err());
    }

    #[test]
    fn explore_draw_layout_is_single_categorical() {
        // One draw per round from the exploration stream, none on exploit
        // rounds from the learner stream beyond the arm sample.
        let mut mb = make(2, 0.5);
        let mut rb = SeededRng::new(3, StreamId::EXPLORATION);
        let mut rf = SeededRng::new(3, StreamId::LEARNER);
        for round in 0..50 {
            let before_b = rb.draws();
            let before_f = rf.draws();
            let r = mb.round(&mut rb, &mut rf, |_| 0.5).unwrap();
            assert_eq!(rb.draws(), before_b + 1, "round {round}");
            let expected_f = if r.explored { 0 } else { 1 };
            assert_eq!(rf.draws(), before_f + expected_f, "round {round}");
        }
    }
}
