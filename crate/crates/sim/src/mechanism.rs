//! Principal selection mechanisms over `k` agents plus the outside option.
//!
//! A mechanism's entire input is the principal transcript: the arms it chose
//! and their realized returns. The trait offers no channel for efforts,
//! states, or unselected returns, so information hiding holds by
//! construction; a sentinel test in the game module verifies it empirically.

use agentsel_core::{
    bandit::{BanditRound, MonoBandit},
    choose_epsilon,
    dist::LossRange,
    learners::{ExpWeights, FullInfoLearner, TreeSwap, TreeSwapConfig},
    regret,
    rng::{SeededRng, StreamId},
};

use crate::contract::Contract;
use crate::error::{Result, SimError};

/// One selection: the chosen arm (the outside option is arm `agents`), and
/// whether a learner-backed mechanism flagged the round exploratory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub arm: usize,
    pub explored: Option<bool>,
}

pub trait SelectionMechanism {
    /// Number of arms including the outside option.
    fn arms(&self) -> usize;

    fn select(&mut self) -> Selection;

    /// Realized return of the arm just selected (zero for the outside option).
    fn observe_return(&mut self, realized_return: f64);
}

/// Always selects the same arm.
pub struct ConstantMechanism {
    arm: usize,
    arms: usize,
}

impl ConstantMechanism {
    pub fn new(arm: usize, arms: usize) -> Result<Self> {
        if arm >= arms {
            return Err(SimError::Config(format!(
                "constant arm {arm} out of range for {arms} arms"
            )));
        }
        Ok(ConstantMechanism { arm, arms })
    }
}

impl SelectionMechanism for ConstantMechanism {
    fn arms(&self) -> usize {
        self.arms
    }

    fn select(&mut self) -> Selection {
        Selection {
            arm: self.arm,
            explored: None,
        }
    }

    fn observe_return(&mut self, _realized_return: f64) {}
}

/// Maps a principal per-round utility in [-1, 1] onto a unit-range loss.
/// Higher return means lower loss, so reward-monotonicity of selection is
/// exactly loss-decrease monotonicity of the backing learner.
pub fn utility_to_loss(u: f64) -> f64 {
    ((1.0 - u) / 2.0).clamp(0.0, 1.0)
}

/// Loss assigned to the outside option's constant zero utility.
pub const OUTSIDE_LOSS: f64 = 0.5;

/// Which full-information learner backs the bandit reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackingLearner {
    ExpWeights,
    TreeSwap { depth: usize },
}

/// Learner-backed mechanism: a monotone bandit reduction over the `k+1` arms
/// fed with losses derived from realized net utilities.
pub struct BanditMechanism {
    bandit: MonoBandit<Box<dyn FullInfoLearner + Send>>,
    contract: Contract,
    rng_b: SeededRng,
    rng_f: SeededRng,
    arms: usize,
    pending: Option<BanditRound>,
    epsilon: f64,
    inner_bound: f64,
}

impl BanditMechanism {
    /// `arms` includes the outside option. `epsilon` defaults to the
    /// bound-minimizing value for the backing learner's regret bound.
    pub fn new(
        learner: BackingLearner,
        arms: usize,
        horizon: usize,
        contract: &Contract,
        seed: u64,
        epsilon: Option<f64>,
    ) -> Result<Self> {
        if arms < 2 {
            return Err(SimError::Config(
                "need at least one agent plus the outside option".into(),
            ));
        }
        contract.supports_learner_backend()?;
        let inner_bound = match learner {
            BackingLearner::ExpWeights => regret::bound_exp_weights(horizon, arms, 1.0),
            BackingLearner::TreeSwap { depth } => {
                let config = TreeSwapConfig::for_horizon(depth, horizon)?;
                regret::bound_tree_swap(horizon, arms, depth, config.branching)
            }
        };
        let epsilon = match epsilon {
            Some(e) => {
                if !(0.0..=1.0).contains(&e) {
                    return Err(SimError::Config(format!("epsilon {e} outside [0, 1]")));
                }
                e
            }
            None => choose_epsilon(horizon, arms, inner_bound)?,
        };
        let inner_range =
            MonoBandit::<Box<dyn FullInfoLearner + Send>>::inner_range(arms, epsilon, LossRange::UNIT);
        let width = inner_range.width().max(1.0);
        let inner: Box<dyn FullInfoLearner + Send> = match learner {
            BackingLearner::ExpWeights => Box::new(ExpWeights::tuned(arms, horizon, width)?),
            BackingLearner::TreeSwap { depth } => {
                let config = TreeSwapConfig::for_horizon(depth, horizon)?;
                let steps = config.branching;
                let base = Box::new(move |period: usize| {
                    let level_width = agentsel_core::bandit::averaged_estimate_width(
                        arms, epsilon, period,
                    );
                    ExpWeights::tuned(arms, steps, level_width).expect("valid")
                });
                Box::new(TreeSwap::new(base, config)?)
            }
        };
        Ok(BanditMechanism {
            bandit: MonoBandit::new(inner, epsilon, LossRange::UNIT)?,
            contract: contract.clone(),
            rng_b: SeededRng::new(seed, StreamId::EXPLORATION),
            rng_f: SeededRng::new(seed, StreamId::LEARNER),
            arms,
            pending: None,
            epsilon,
            inner_bound,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The backing learner's regret bound used for epsilon selection.
    pub fn inner_bound(&self) -> f64 {
        self.inner_bound
    }

    fn outside(&self) -> usize {
        self.arms - 1
    }
}

impl SelectionMechanism for BanditMechanism {
    fn arms(&self) -> usize {
        self.arms
    }

    fn select(&mut self) -> Selection {
        let round = self.bandit.select(&mut self.rng_b, &mut self.rng_f);
        self.pending = Some(round);
        Selection {
            arm: round.arm,
            explored: Some(round.explored),
        }
    }

    fn observe_return(&mut self, realized_return: f64) {
        let round = self
            .pending
            .take()
            .expect("observe_return follows select");
        let u = if round.arm == self.outside() {
            0.0
        } else {
            realized_return - self.contract.payment(realized_return)
        };
        self.bandit
            .update(round, utility_to_loss(u))
            .expect("unit-range loss by construction");
    }
}
