//! Drives learners against adversaries and records evaluation data.
//!
//! The runner hands the learner only what its feedback model allows (the full
//! vector for full-information learners, the played arm's loss for bandit
//! learners) while recording the complete loss matrix on the side: the regret
//! meters are offline evaluators over realized losses.

use crate::adversary::AdaptiveAdversary;
use crate::bandit::MonoBandit;
use crate::dist::sample;
use crate::error::Result;
use crate::learners::FullInfoLearner;
use crate::rng::SeededRng;
use crate::transcript::{OnlineTranscript, RoundRecord};

/// Evaluation record of one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub plays: Vec<usize>,
    pub explore_flags: Vec<Option<bool>>,
    /// Full loss matrix, rounds by arms. Never shown to bandit learners.
    pub losses: Vec<Vec<f64>>,
    pub transcript: OnlineTranscript,
}

impl RunOutcome {
    pub fn realized_loss(&self) -> f64 {
        self.plays
            .iter()
            .zip(self.losses.iter())
            .map(|(&p, row)| row[p])
            .sum()
    }
}

/// Runs a full-information learner: it samples an arm from its current
/// distribution, then observes the entire loss vector.
pub fn run_full_info(
    learner: &mut dyn FullInfoLearner,
    adversary: &dyn AdaptiveAdversary,
    horizon: usize,
    rng: &mut SeededRng,
) -> Result<RunOutcome> {
    let mut transcript = OnlineTranscript::new(horizon);
    let mut plays = Vec::with_capacity(horizon);
    let mut losses = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let loss = adversary.next_loss(&transcript);
        let draw = rng.next_draw_id();
        let arm = sample(learner.current(), rng);
        transcript.push(RoundRecord {
            selected_arm: arm,
            observed_loss: loss.get(arm),
            explore: None,
            rng_draws: vec![draw],
        })?;
        plays.push(arm);
        losses.push(loss.values().to_vec());
        learner.observe(&loss)?;
    }
    Ok(RunOutcome {
        plays,
        explore_flags: vec![None; horizon],
        losses,
        transcript,
    })
}

/// Runs the bandit reduction; only the played arm's loss crosses into the
/// learner side each round.
pub fn run_bandit<L: FullInfoLearner>(
    bandit: &mut MonoBandit<L>,
    adversary: &dyn AdaptiveAdversary,
    horizon: usize,
    rng_b: &mut SeededRng,
    rng_f: &mut SeededRng,
) -> Result<RunOutcome> {
    let mut transcript = OnlineTranscript::new(horizon);
    let mut plays = Vec::with_capacity(horizon);
    let mut flags = Vec::with_capacity(horizon);
    let mut losses = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let loss = adversary.next_loss(&transcript);
        let draw_b = rng_b.next_draw_id();
        let draw_f = rng_f.next_draw_id();
        let round = bandit.round(rng_b, rng_f, |arm| loss.get(arm))?;
        transcript.push(RoundRecord {
            selected_arm: round.arm,
            observed_loss: loss.get(round.arm),
            explore: Some(round.explored),
            rng_draws: vec![draw_b, draw_f],
        })?;
        plays.push(round.arm);
        flags.push(Some(round.explored));
        losses.push(loss.values().to_vec());
    }
    Ok(RunOutcome {
        plays,
        explore_flags: flags,
        losses,
        transcript,
    })
}
