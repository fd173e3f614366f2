//! Exponential weights (multiplicative weights) learner.

use crate::dist::{normalize, Distribution, LossVector};
use crate::error::{CoreError, Result};
use crate::learners::FullInfoLearner;

/// Weight magnitude that triggers renormalization. Renormalizing divides all
/// weights by the maximum, which leaves the played distribution unchanged.
const RENORM_THRESHOLD: f64 = 1e150;

/// Multiplicative-weights learner: weights start at one and each update
/// multiplies arm `i`'s weight by `exp(-eta * loss_i)`.
#[derive(Debug, Clone)]
pub struct ExpWeights {
    eta: f64,
    weights: Vec<f64>,
    current: Distribution,
}

impl ExpWeights {
    pub fn new(k: usize, eta: f64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::InvalidParameter("k must be positive".into()));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "learning rate eta = {eta} must be positive and finite"
            )));
        }
        Ok(ExpWeights {
            eta,
            weights: vec![1.0; k],
            current: Distribution::uniform(k),
        })
    }

    /// Learning rate tuned for a known horizon and loss-range width, the
    /// standard `sqrt(8 ln k / T) / width` schedule.
    pub fn tuned(k: usize, horizon: usize, range_width: f64) -> Result<Self> {
        if horizon == 0 || range_width <= 0.0 {
            return Err(CoreError::InvalidParameter(
                "horizon and range width must be positive".into(),
            ));
        }
        let eta = (8.0 * (k as f64).ln() / horizon as f64).sqrt() / range_width;
        // A single arm has ln k = 0; any positive eta behaves identically.
        Self::new(k, if eta > 0.0 { eta } else { 1.0 })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl FullInfoLearner for ExpWeights {
    fn arms(&self) -> usize {
        self.weights.len()
    }

    fn current(&self) -> &Distribution {
        &self.current
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Distribution> {
        if loss.len() != self.weights.len() {
            return Err(CoreError::LengthMismatch {
                expected: self.weights.len(),
                got: loss.len(),
            });
        }
        for (w, &l) in self.weights.iter_mut().zip(loss.values()) {
            *w *= (-self.eta * l).exp();
        }
        let max = self.weights.iter().cloned().fold(f64::MIN, f64::max);
        if max > RENORM_THRESHOLD || max < 1.0 / RENORM_THRESHOLD {
            for w in self.weights.iter_mut() {
                *w /= max;
            }
        }
        self.current = normalize(&self.weights)?;
        Ok(self.current.clone())
    }
}
