//! Probability distributions over arms and bounded loss vectors.

use crate::error::{CoreError, Result};
use crate::rng::SeededRng;

/// Absolute tolerance on the sum of a probability vector at construction.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Absolute tolerance for downstream probability assertions (accumulated
/// arithmetic over long horizons).
pub const PROB_ASSERT_TOL: f64 = 1e-9;

/// A probability vector over `k` arms. Entries are non-negative and sum to
/// one within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates an explicit probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(CoreError::InvalidDistribution("empty vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= 0.0 && p <= 1.0) {
                return Err(CoreError::InvalidDistribution(format!(
                    "entry {i} = {p} outside [0, 1]"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(CoreError::InvalidDistribution(format!(
                "entries sum to {sum}, off by {:.3e}",
                (sum - 1.0).abs()
            )));
        }
        Ok(Distribution { probs })
    }

    /// Uniform distribution over `k` arms.
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution needs at least one arm");
        Distribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// Point mass on `arm`.
    pub fn point(k: usize, arm: usize) -> Self {
        assert!(arm < k);
        let mut probs = vec![0.0; k];
        probs[arm] = 1.0;
        Distribution { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, arm: usize) -> f64 {
        self.probs[arm]
    }

    /// Pointwise maximum absolute difference to another distribution.
    pub fn linf_distance(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Normalizes a vector of non-negative masses into a [`Distribution`].
///
/// Rejects vectors with negative entries or zero total mass.
pub fn normalize(raw: &[f64]) -> Result<Distribution> {
    if raw.is_empty() {
        return Err(CoreError::InvalidDistribution("empty vector".into()));
    }
    let mut sum = 0.0;
    for (i, &x) in raw.iter().enumerate() {
        if x < 0.0 || !x.is_finite() {
            return Err(CoreError::InvalidDistribution(format!(
                "entry {i} = {x} is negative or non-finite"
            )));
        }
        sum += x;
    }
    if sum <= 0.0 {
        return Err(CoreError::InvalidDistribution(
            "all entries are zero".into(),
        ));
    }
    let probs: Vec<f64> = raw.iter().map(|&x| x / sum).collect();
    Distribution::new(probs)
}

/// Samples an arm index from `d` using exactly one uniform draw from `rng`
/// (inverse-CDF over arms in index order).
pub fn sample(d: &Distribution, rng: &mut SeededRng) -> usize {
    let u = rng.next_unit();
    sample_with_unit(d, u)
}

/// Inverse-CDF sampling from an explicit uniform variate. Split out so exact
/// enumerations can reuse the same arm-ordering convention.
pub fn sample_with_unit(d: &Distribution, u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &p) in d.probs().iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    d.len() - 1
}

/// Declared loss range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRange {
    pub lo: f64,
    pub hi: f64,
}

impl LossRange {
    pub const UNIT: LossRange = LossRange { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "loss range [{lo}, {hi}] is not a finite interval"
            )));
        }
        Ok(LossRange { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Smallest range containing both `self` and `other`.
    pub fn union(&self, other: &LossRange) -> LossRange {
        LossRange {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

/// A per-round vector of `k` losses, each within a declared range.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    values: Vec<f64>,
    range: LossRange,
}

impl LossVector {
    pub fn new(values: Vec<f64>, range: LossRange) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::InvalidLoss("empty vector".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !range.contains(v) {
                return Err(CoreError::InvalidLoss(format!(
                    "entry {i} = {v} outside declared [{}, {}]",
                    range.lo, range.hi
                )));
            }
        }
        Ok(LossVector { values, range })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, arm: usize) -> f64 {
        self.values[arm]
    }

    pub fn range(&self) -> LossRange {
        self.range
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalize_symmetric() {
        let d = normalize(&[1.0, 1.0, 1.0]).unwrap();
        for &p in d.probs() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalize_degenerate_mass() {
        let d = normalize(&[2.0, 0.0]).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn normalize_hand_value() {
        // 1 / (1 + e^{-0.2}) evaluated by hand to more than six digits.
        let d = normalize(&[1.0, (-0.2f64).exp()]).unwrap();
        assert_abs_diff_eq!(d.get(0), 0.549833997312478, epsilon = 1e-12);
        assert_abs_diff_eq!(d.get(1), 0.450166002687522, epsilon = 1e-12);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(normalize(&[0.0, 0.0]).is_err());
        assert!(normalize(&[1.0, -0.1]).is_err());
        assert!(normalize(&[]).is_err());
    }

    #[test]
    fn sample_point_mass() {
        let d = Distribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        for seed in 0..20 {
            let mut rng = SeededRng::new(seed, StreamId::LEARNER);
            assert_eq!(sample(&d, &mut rng), 0);
        }
    }

    #[test]
    fn sample_deterministic_under_fixed_seed() {
        let d = Distribution::new(vec![0.5, 0.5]).unwrap();
        let mut a = SeededRng::new(123, StreamId::LEARNER);
        let mut b = SeededRng::new(123, StreamId::LEARNER);
        for _ in 0..50 {
            assert_eq!(sample(&d, &mut a), sample(&d, &mut b));
        }
    }

    #[test]
    fn sample_advances_rng_exactly_once() {
        let d = Distribution::new(vec![0.3, 0.7]).unwrap();
        let mut rng = SeededRng::new(9, StreamId::LEARNER);
        sample(&d, &mut rng);
        assert_eq!(rng.draws(), 1);
    }

    #[test]
    fn sample_frequencies_match_law_of_large_numbers() {
        let d = Distribution::new(vec![0.3, 0.7]).unwrap();
        let mut rng = SeededRng::new(2024, StreamId::LEARNER);
        let n = 1_000_000;
        let mut count0 = 0usize;
        for _ in 0..n {
            if sample(&d, &mut rng) == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / n as f64;
        assert!((freq - 0.3).abs() < 0.002, "freq(arm 0) = {freq}");
    }

    #[test]
    fn loss_vector_enforces_declared_range() {
        let range = LossRange::new(-2.0, 1.0).unwrap();
        assert!(LossVector::new(vec![-0.1, 1.0, 0.0], range).is_ok());
        assert!(LossVector::new(vec![1.5, 0.0, 0.0], range).is_err());
        assert!(LossVector::new(vec![-2.5, 0.0, 0.0], range).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_proportional_and_sums_to_one(
            raw in proptest::collection::vec(0.0f64..1e6, 1..12),
        ) {
            prop_assume!(raw.iter().sum::<f64>() > 0.0);
            let d = normalize(&raw).unwrap();
            let sum: f64 = d.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() <= PROB_SUM_TOL);
            // Proportionality: cross-ratios preserved where defined.
            let total: f64 = raw.iter().sum();
            for (p, x) in d.probs().iter().zip(raw.iter()) {
                prop_assert!((p - x / total).abs() <= 1e-12);
            }
        }

        #[test]
        fn sample_stays_in_support(probs_seed in 0u64..500) {
            let mut rng = SeededRng::new(probs_seed, StreamId::ADVERSARY);
            let k = 1 + (probs_seed % 6) as usize;
            let raw: Vec<f64> = (0..k).map(|_| rng.next_unit() + 1e-9).collect();
            let d = normalize(&raw).unwrap();
            let mut draw_rng = SeededRng::new(probs_seed, StreamId::LEARNER);
            for _ in 0..32 {
                let arm = sample(&d, &mut draw_rng);
                prop_assert!(arm < k);
            }
        }
    }
}
