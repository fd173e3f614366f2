//! Swap-regret learner built from per-arm exponential-weights copies.
//!
//! Copy `i` receives the loss vector scaled by the current probability of
//! arm `i`; the played distribution is the fixed point of the column matrix
//! assembled from the copies' distributions. Known to violate selection
//! monotonicity (see the golden counterexample in `monotone`).

use crate::dist::{Distribution, LossVector};
use crate::error::{CoreError, Result};
use crate::learners::{stationary_distribution, ExpWeights, FullInfoLearner};

#[derive(Debug, Clone)]
pub struct BlumMansour {
    copies: Vec<ExpWeights>,
    current: Distribution,
}

impl BlumMansour {
    pub fn new(k: usize, eta: f64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::InvalidParameter("k must be positive".into()));
        }
        let copies = (0..k)
            .map(|_| ExpWeights::new(k, eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlumMansour {
            copies,
            current: Distribution::uniform(k),
        })
    }

    pub fn copies(&self) -> &[ExpWeights] {
        &self.copies
    }
}

impl FullInfoLearner for BlumMansour {
    fn arms(&self) -> usize {
        self.copies.len()
    }

    fn current(&self) -> &Distribution {
        &self.current
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Distribution> {
        let k = self.copies.len();
        if loss.len() != k {
            return Err(CoreError::LengthMismatch {
                expected: k,
                got: loss.len(),
            });
        }
        let range = loss.range();
        for (i, copy) in self.copies.iter_mut().enumerate() {
            let scale = self.current.get(i);
            let scaled: Vec<f64> = loss.values().iter().map(|&l| scale * l).collect();
            // Scaling by a probability keeps each entry inside the declared range
            // (the range contains zero whenever lo <= 0 <= hi; widen otherwise).
            let scaled_range = range.union(&crate::dist::LossRange { lo: 0.0, hi: 0.0 });
            copy.observe(&LossVector::new(scaled, scaled_range)?)?;
        }
        let columns: Vec<Distribution> =
            self.copies.iter().map(|c| c.current().clone()).collect();
        self.current = stationary_distribution(&columns)?;
        Ok(self.current.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::LossRange;
    use approx::assert_abs_diff_eq;

    fn lv(values: Vec<f64>) -> LossVector {
        LossVector::new(values, LossRange::new(-2.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn first_round_matches_published_rows() {
        // Round one of the counterexample pair: the copies are all fed the
        // uniform scaling, so the fixed point equals the common copy
        // distribution. Values from the published matrices.
        let mut bm = BlumMansour::new(3, 0.2).unwrap();
        let d = bm.observe(&lv(vec![-0.1, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(d.get(0), 0.34215564, epsilon = 1e-6);
        assert_abs_diff_eq!(d.get(1), 0.31796216, epsilon = 1e-6);
        assert_abs_diff_eq!(d.get(2), 0.33988219, epsilon = 1e-6);

        let mut bm2 = BlumMansour::new(3, 0.2).unwrap();
        let d2 = bm2.observe(&lv(vec![-2.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(d2.get(0), 0.37120847, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_copies_give_their_common_distribution() {
        // With a zero loss all copies stay uniform and the fixed point is uniform.
        let mut bm = BlumMansour::new(4, 0.3).unwrap();
        let d = bm.observe(&lv(vec![0.0; 4])).unwrap();
        for &p in d.probs() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn fixed_point_residual_contract() {
        let mut bm = BlumMansour::new(3, 0.2).unwrap();
        for t in 0..50 {
            let l = if t % 2 == 0 {
                vec![1.0, -1.0, 0.5]
            } else {
                vec![-0.5, 1.0, -1.0]
            };
            bm.observe(&lv(l)).unwrap();
            let cols: Vec<Distribution> =
                bm.copies().iter().map(|c| c.current().clone()).collect();
            let p = bm.current();
            for j in 0..3 {
                let image: f64 = (0..3).map(|i| cols[i].get(j) * p.get(i)).sum();
                assert!((image - p.get(j)).abs() <= 1e-10);
            }
        }
    }
}
