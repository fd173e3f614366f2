//! Seeded online-learning toolkit: full-information learners (exponential
//! weights, a per-arm-copies swap-regret learner, a lazy-tree swap-regret
//! learner), a monotonicity-preserving bandit reduction with uniform
//! exploration and importance-weighted estimates, empirical regret meters
//! with brute-force oracles, and a harness that checks selection
//! monotonicity exactly or by Monte Carlo — including a golden
//! counterexample showing the per-arm-copies construction is not monotone.
//!
//! Every run is deterministic given a 64-bit seed; randomness is split into
//! named streams so learner-internal draws and exploration draws can be
//! varied independently.

pub mod adversary;
pub mod bandit;
pub mod dist;
pub mod error;
pub mod learners;
pub mod monotone;
pub mod regret;
pub mod rng;
pub mod runner;
pub mod transcript;

pub use bandit::{choose_epsilon, BanditRound, MonoBandit};
pub use dist::{normalize, sample, Distribution, LossRange, LossVector};
pub use error::{CoreError, Result};
pub use learners::{
    stationary_distribution, BlumMansour, ExpWeights, FullInfoLearner, LearnerFactory, TreeSwap,
    TreeSwapConfig,
};
pub use monotone::{MonotonicityVerdict, PerturbationPair};
pub use regret::RegretReport;
pub use rng::{DrawId, SeededRng, StreamId};
pub use runner::{run_bandit, run_full_info, RunOutcome};
pub use transcript::{OnlineTranscript, RoundRecord};
