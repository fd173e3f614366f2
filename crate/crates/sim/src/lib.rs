//! Repeated principal-agent selection games over affine outcome models:
//! linear and concave contracts, myopic/boosted/fixed agent policies,
//! constant and learner-backed selection mechanisms with an outside option,
//! a limited-liability variant that defers payments to debt-forgiving tabs,
//! policy-regret evaluation against constant-selection benchmarks, and exact
//! enumeration of tiny restricted games for the structural checks.

pub mod agent;
pub mod contract;
pub mod desk;
pub mod error;
pub mod game;
pub mod mechanism;
pub mod model;
pub mod policy_regret;

pub use agent::{effort_for_round, myopic_action, AgentSpec, Belief, CostFn, PolicyKind};
pub use contract::Contract;
pub use error::{Result, SimError};
pub use game::{play_game1, play_game2, AgentConfig, GameKind, GameRound, GameTranscript, TabLedger};
pub use mechanism::{
    utility_to_loss, BackingLearner, BanditMechanism, ConstantMechanism, Selection,
    SelectionMechanism, OUTSIDE_LOSS,
};
pub use model::OutcomeModel;
pub use policy_regret::{benchmark_constant_utility, policy_regret};
