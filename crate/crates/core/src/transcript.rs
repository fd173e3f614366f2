//! Learner-side transcript of an online run.

use crate::error::{CoreError, Result};
use crate::rng::DrawId;

/// One played round: the selected arm, the loss observed for it, whether the
/// round was an exploration round (bandit wrappers only), and identifiers of
/// the randomness consumed.
///
/// Under bandit feedback only the selected arm's loss is recorded; the full
/// loss vector never enters the transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub selected_arm: usize,
    pub observed_loss: f64,
    pub explore: Option<bool>,
    pub rng_draws: Vec<DrawId>,
}

/// Sequence of played rounds, capped at a declared horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTranscript {
    horizon: usize,
    rounds: Vec<RoundRecord>,
}

impl OnlineTranscript {
    pub fn new(horizon: usize) -> Self {
        OnlineTranscript {
            horizon,
            rounds: Vec::with_capacity(horizon),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn plays(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.selected_arm).collect()
    }

    pub fn push(&mut self, round: RoundRecord) -> Result<()> {
        if self.rounds.len() >= self.horizon {
            return Err(CoreError::InvalidParameter(format!(
                "transcript already holds {} rounds (horizon {})",
                self.rounds.len(),
                self.horizon
            )));
        }
        self.rounds.push(round);
        Ok(())
    }
}
