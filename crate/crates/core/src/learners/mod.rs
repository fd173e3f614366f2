//! Full-information online learners.
//!
//! All learners expose the same interface: they hold a current distribution
//! over arms, consume a full loss vector, and emit the next distribution.
//! They are deterministic given the loss sequence, which is what lets the
//! monotonicity harness compare them at the distribution level.

mod blum_mansour;
mod exp_weights;
mod stationary;
mod tree_swap;

pub use blum_mansour::BlumMansour;
pub use exp_weights::ExpWeights;
pub use stationary::stationary_distribution;
pub use tree_swap::{TreeSwap, TreeSwapConfig};

use crate::dist::{Distribution, LossVector};
use crate::error::Result;

pub trait FullInfoLearner {
    /// Number of arms.
    fn arms(&self) -> usize;

    /// Distribution the learner currently plays.
    fn current(&self) -> &Distribution;

    /// Consume a full loss vector; returns the updated distribution.
    fn observe(&mut self, loss: &LossVector) -> Result<Distribution>;
}

impl FullInfoLearner for Box<dyn FullInfoLearner + Send> {
    fn arms(&self) -> usize {
        (**self).arms()
    }

    fn current(&self) -> &Distribution {
        (**self).current()
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Distribution> {
        (**self).observe(loss)
    }
}

/// A constructor for fresh learner instances, used wherever several
/// identically-configured copies are needed (lazy trees, harness reruns).
pub type LearnerFactory = Box<dyn Fn() -> Box<dyn FullInfoLearner + Send> + Send + Sync>;
