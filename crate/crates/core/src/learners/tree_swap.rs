//! Lazy-tree swap-regret learner.
//!
//! Maintains a depth-`d` hierarchy of base-learner instances over an `M`-ary
//! division of the horizon. The level-`j` instance is stepped only at the end
//! of each of its periods (length `M^(d-j)` rounds), receiving the average of
//! the losses buffered over that period, and is restarted whenever its
//! ancestor block advances. The played distribution is the uniform mixture of
//! the `d` active instances' distributions. Averaging both across the buffer
//! and across instances preserves monotonicity of the base learner.

use crate::dist::{normalize, Distribution, LossVector};
use crate::error::{CoreError, Result};
use crate::learners::FullInfoLearner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSwapConfig {
    pub depth: usize,
    pub branching: usize,
}

impl TreeSwapConfig {
    pub fn new(depth: usize, branching: usize) -> Result<Self> {
        if depth == 0 || branching == 0 {
            return Err(CoreError::InvalidParameter(
                "depth and branching must be positive".into(),
            ));
        }
        Ok(TreeSwapConfig { depth, branching })
    }

    /// Branching chosen as the smallest `M` with `M^depth >= horizon`.
    pub fn for_horizon(depth: usize, horizon: usize) -> Result<Self> {
        if depth == 0 || horizon == 0 {
            return Err(CoreError::InvalidParameter(
                "depth and horizon must be positive".into(),
            ));
        }
        let mut m = (horizon as f64).powf(1.0 / depth as f64).ceil() as usize;
        m = m.max(1);
        while pow_checked(m, depth).map_or(true, |p| p < horizon as u128) {
            m += 1;
        }
        while m > 1 && pow_checked(m - 1, depth).is_some_and(|p| p >= horizon as u128) {
            m -= 1;
        }
        TreeSwapConfig::new(depth, m)
    }

    /// Rounds between updates of the level-`j` instance (1-based level).
    fn period(&self, level: usize) -> usize {
        self.branching.pow((self.depth - level) as u32)
    }

    /// Rounds between restarts of the level-`j` instance.
    fn refresh(&self, level: usize) -> u128 {
        (self.branching as u128).pow((self.depth - level + 1) as u32)
    }
}

fn pow_checked(base: usize, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(exp as u32)
}

struct Level<L> {
    instance: L,
    loss_sum: Vec<f64>,
    buffered: usize,
    /// Union of the declared ranges buffered since the last flush; the period
    /// average stays inside it.
    buffered_range: Option<crate::dist::LossRange>,
}

pub struct TreeSwap<L: FullInfoLearner> {
    /// Constructs a fresh base instance for a level, given that level's
    /// period length (rounds averaged per step) — lets callers tune learning
    /// rates to the statistics of period-averaged inputs.
    factory: Box<dyn Fn(usize) -> L + Send + Sync>,
    config: TreeSwapConfig,
    levels: Vec<Level<L>>,
    rounds_done: usize,
    arms: usize,
    current: Distribution,
}

impl<L: FullInfoLearner> TreeSwap<L> {
    pub fn new(
        factory: Box<dyn Fn(usize) -> L + Send + Sync>,
        config: TreeSwapConfig,
    ) -> Result<Self> {
        let levels: Vec<Level<L>> = (0..config.depth)
            .map(|j| {
                let instance = factory(config.period(j + 1));
                let arms = instance.arms();
                Level {
                    instance,
                    loss_sum: vec![0.0; arms],
                    buffered: 0,
                    buffered_range: None,
                }
            })
            .collect();
        if levels.is_empty() {
            return Err(CoreError::InvalidParameter("depth must be positive".into()));
        }
        let arms = levels[0].instance.arms();
        let current = mixture(&levels)?;
        Ok(TreeSwap {
            factory,
            config,
            levels,
            rounds_done: 0,
            arms,
            current,
        })
    }

    pub fn config(&self) -> TreeSwapConfig {
        self.config
    }
}

fn mixture<L: FullInfoLearner>(levels: &[Level<L>]) -> Result<Distribution> {
    let arms = levels[0].instance.arms();
    let mut mix = vec![0.0f64; arms];
    for level in levels {
        for (m, &p) in mix.iter_mut().zip(level.instance.current().probs()) {
            *m += p;
        }
    }
    let d = levels.len() as f64;
    for m in mix.iter_mut() {
        *m /= d;
    }
    normalize(&mix)
}

impl<L: FullInfoLearner> FullInfoLearner for TreeSwap<L> {
    fn arms(&self) -> usize {
        self.arms
    }

    fn current(&self) -> &Distribution {
        &self.current
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Distribution> {
        if loss.len() != self.arms {
            return Err(CoreError::LengthMismatch {
                expected: self.arms,
                got: loss.len(),
            });
        }
        let completed = self.rounds_done + 1;
        for (j, level) in self.levels.iter_mut().enumerate() {
            let lvl = j + 1;
            for (s, &l) in level.loss_sum.iter_mut().zip(loss.values()) {
                *s += l;
            }
            level.buffered += 1;
            level.buffered_range = Some(match level.buffered_range {
                Some(r) => r.union(&loss.range()),
                None => loss.range(),
            });
            let period = self.config.period(lvl);
            if completed % period == 0 {
                let avg: Vec<f64> = level.loss_sum.iter().map(|s| s / period as f64).collect();
                let range = level.buffered_range.take().expect("buffer was non-empty");
                level.instance.observe(&LossVector::new(avg, range)?)?;
                level.loss_sum.fill(0.0);
                level.buffered = 0;
            }
        }
        self.rounds_done = completed;
        for (j, level) in self.levels.iter_mut().enumerate() {
            let lvl = j + 1;
            if (completed as u128) % self.config.refresh(lvl) == 0 {
                level.instance = (self.factory)(self.config.period(lvl));
                level.loss_sum.fill(0.0);
                level.buffered = 0;
                level.buffered_range = None;
            }
        }
        self.current = mixture(&self.levels)?;
        Ok(self.current.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LossRange;
    use crate::learners::ExpWeights;

    fn lv(values: Vec<f64>) -> LossVector {
        LossVector::new(values, LossRange::UNIT).unwrap()
    }

    fn ew_factory(k: usize, eta: f64) -> Box<dyn Fn(usize) -> ExpWeights + Send + Sync> {
        Box::new(move |_period| ExpWeights::new(k, eta).unwrap())
    }

    #[test]
    fn depth_one_with_full_branching_equals_base() {
        let t = 12;
        let config = TreeSwapConfig::for_horizon(1, t).unwrap();
        assert_eq!(config.branching, t);
        let mut tree = TreeSwap::new(ew_factory(2, 0.5), config).unwrap();
        let mut base = ExpWeights::new(2, 0.5).unwrap();
        for round in 0..t {
            let loss = if round % 2 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            };
            let dt = tree.observe(&lv(loss.clone())).unwrap();
            let db = base.observe(&lv(loss)).unwrap();
            assert!(dt.linf_distance(&db) <= 1e-15);
        }
    }

    #[test]
    fn constant_loss_mixture_tracks_base_on_constant_input() {
        // Every instance sees the same (averaged) constant vector, so each
        // level's distribution after s steps equals the base run after s steps.
        let config = TreeSwapConfig::new(2, 3).unwrap();
        let mut tree = TreeSwap::new(ew_factory(2, 0.4), config).unwrap();
        let constant = vec![0.8, 0.2];
        let mut base = ExpWeights::new(2, 0.4).unwrap();
        let mut base_trajectory = vec![base.current().clone()];
        for _ in 0..9 {
            base_trajectory.push(base.observe(&lv(constant.clone())).unwrap());
        }
        for round in 0..8usize {
            tree.observe(&lv(constant.clone())).unwrap();
            let completed = round + 1;
            // Level 2 (period 1) has stepped `completed % 3` times since its
            // last restart; level 1 (period 3) has stepped `completed / 3` times.
            let steps_l1 = completed / 3;
            let steps_l2 = completed % 3;
            let expect: Vec<f64> = (0..2)
                .map(|a| {
                    0.5 * base_trajectory[steps_l1].get(a) + 0.5 * base_trajectory[steps_l2].get(a)
                })
                .collect();
            for a in 0..2 {
                assert!((tree.current().get(a) - expect[a]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn for_horizon_picks_smallest_sufficient_branching() {
        assert_eq!(TreeSwapConfig::for_horizon(2, 16).unwrap().branching, 4);
        assert_eq!(TreeSwapConfig::for_horizon(2, 17).unwrap().branching, 5);
        assert_eq!(TreeSwapConfig::for_horizon(3, 1000).unwrap().branching, 10);
        assert_eq!(TreeSwapConfig::for_horizon(1, 7).unwrap().branching, 7);
    }
}
