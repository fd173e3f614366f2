//! Selection-monotonicity harness.
//!
//! A selection rule is monotone when decreasing the loss of one arm in one
//! round (equivalently, raising its realized reward) never decreases the
//! probability of selecting that arm in later rounds. The harness builds
//! single-cell perturbation pairs and compares selection probabilities either
//! exactly (full-information learners emit deterministic distributions;
//! small bandit instances enumerate every exploration branch) or by Monte
//! Carlo with a one-sided confidence gate.

use crate::bandit::MonoBandit;
use crate::dist::{Distribution, LossRange, LossVector};
use crate::error::{CoreError, Result};
use crate::learners::{BlumMansour, FullInfoLearner};

/// Two loss sequences differing in exactly one cell, where the perturbed
/// value is strictly smaller.
#[derive(Debug, Clone)]
pub struct PerturbationPair {
    base: Vec<LossVector>,
    round: usize,
    arm: usize,
    delta: f64,
}

impl PerturbationPair {
    /// `round` is 0-based; `delta > 0` is subtracted from `base[round][arm]`.
    pub fn new(base: Vec<LossVector>, round: usize, arm: usize, delta: f64) -> Result<Self> {
        if base.is_empty() {
            return Err(CoreError::InvalidParameter("empty base sequence".into()));
        }
        if round >= base.len() || arm >= base[0].len() {
            return Err(CoreError::InvalidParameter(format!(
                "perturbation cell ({round}, {arm}) outside {}x{}",
                base.len(),
                base[0].len()
            )));
        }
        if !(delta >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "delta = {delta} must be non-negative"
            )));
        }
        Ok(PerturbationPair {
            base,
            round,
            arm,
            delta,
        })
    }

    pub fn base(&self) -> &[LossVector] {
        &self.base
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn arm(&self) -> usize {
        self.arm
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> usize {
        self.base.len()
    }

    pub fn arms(&self) -> usize {
        self.base[0].len()
    }

    /// The perturbed sequence, with the declared range widened to fit the
    /// decreased cell.
    pub fn perturbed(&self) -> Vec<LossVector> {
        self.base
            .iter()
            .enumerate()
            .map(|(t, lv)| {
                if t == self.round {
                    let mut values = lv.values().to_vec();
                    values[self.arm] -= self.delta;
                    let range = lv.range().union(&LossRange {
                        lo: values[self.arm],
                        hi: values[self.arm],
                    });
                    LossVector::new(values, range).expect("widened range fits")
                } else {
                    lv.clone()
                }
            })
            .collect()
    }
}

/// Verdict of a monotonicity check over one perturbation pair.
#[derive(Debug, Clone)]
pub struct MonotonicityVerdict {
    pub monotone: bool,
    /// `(round, prob_base, prob_perturbed)` for every violating round
    /// (1-based round indices, matching the fixture convention).
    pub violating_rounds: Vec<(usize, f64, f64)>,
    /// Largest observed `prob_base - prob_perturbed` over compared rounds.
    pub max_violation: f64,
}

impl MonotonicityVerdict {
    fn from_rows(rows: Vec<(usize, f64, f64)>, tol: f64) -> Self {
        let mut max_violation = f64::NEG_INFINITY;
        let mut violating = Vec::new();
        for (round, pb, pp) in rows {
            let gap = pb - pp;
            max_violation = max_violation.max(gap);
            if pp < pb - tol {
                violating.push((round, pb, pp));
            }
        }
        MonotonicityVerdict {
            monotone: violating.is_empty(),
            violating_rounds: violating,
            max_violation,
        }
    }
}

/// Distributions a full-information learner emits after each observed round.
pub fn run_distributions(
    factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
    losses: &[LossVector],
) -> Result<Vec<Distribution>> {
    let mut learner = factory();
    let mut out = Vec::with_capacity(losses.len());
    for loss in losses {
        out.push(learner.observe(loss)?);
    }
    Ok(out)
}

/// Compares the probability the learner puts on the perturbed arm at every
/// round from the perturbed cell onward. Distributions are compared directly:
/// full-information learners are deterministic given the loss sequence.
pub fn check_full_info(
    factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
    pair: &PerturbationPair,
    tol: f64,
) -> Result<MonotonicityVerdict> {
    let base = run_distributions(factory, pair.base())?;
    let pert = run_distributions(factory, &pair.perturbed())?;
    let arm = pair.arm();
    let rows: Vec<(usize, f64, f64)> = (pair.round()..base.len())
        .map(|t| (t + 1, base[t].get(arm), pert[t].get(arm)))
        .collect();
    Ok(MonotonicityVerdict::from_rows(rows, tol))
}

/// Cap on the number of exploration branches enumerated exactly.
const EXACT_BRANCH_CAP: u128 = 100_000;

/// Exact marginal play probabilities of the bandit reduction, one vector per
/// round, obtained by enumerating every exploration-branch realization with
/// its probability. Exploit-round arm sampling never reaches the learner's
/// fed sequence, so only the exploration draws branch.
pub fn mono_bandit_marginals(
    inner_factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
    epsilon: f64,
    losses: &[LossVector],
) -> Result<Vec<Vec<f64>>> {
    let horizon = losses.len();
    let k = losses[0].len();
    let branches = (k as u128 + 1).checked_pow(horizon as u32).unwrap_or(u128::MAX);
    if branches > EXACT_BRANCH_CAP {
        return Err(CoreError::InstanceTooLarge {
            branches,
            cap: EXACT_BRANCH_CAP,
        });
    }
    let range = losses
        .iter()
        .fold(losses[0].range(), |acc, lv| acc.union(&lv.range()));

    // Depth-first walk over exploration outcomes; `weight` is the branch
    // probability and `learner` the inner state conditioned on the branch.
    struct Frame {
        marginals: Vec<Vec<f64>>,
    }
    let mut frame = Frame {
        marginals: vec![vec![0.0; k]; horizon],
    };

    fn recurse(
        t: usize,
        weight: f64,
        learner: &mut Box<dyn FullInfoLearner + Send>,
        losses: &[LossVector],
        epsilon: f64,
        range: LossRange,
        frame: &mut Frame,
        inner_factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
        replay: &mut Vec<LossVector>,
    ) -> Result<()> {
        if weight == 0.0 || t == losses.len() {
            return Ok(());
        }
        let k = losses[0].len();
        let p = learner.current().clone();
        // Accumulate this round's play marginal under the branch prefix.
        for arm in 0..k {
            frame.marginals[t][arm] +=
                weight * (epsilon / k as f64 + (1.0 - epsilon) * p.get(arm));
        }
        let inner_range = MonoBandit::<Box<dyn FullInfoLearner + Send>>::inner_range(
            k, epsilon, range,
        );
        // Branch: exploit (zeros fed), or explore each arm (importance weight).
        let mut branch_vectors: Vec<(f64, LossVector)> = Vec::with_capacity(k + 1);
        if epsilon < 1.0 {
            branch_vectors.push((
                1.0 - epsilon,
                LossVector::new(vec![0.0; k], inner_range)?,
            ));
        }
        if epsilon > 0.0 {
            for arm in 0..k {
                let mut fed = vec![0.0; k];
                fed[arm] = k as f64 * losses[t].get(arm) / epsilon;
                branch_vectors.push((epsilon / k as f64, LossVector::new(fed, inner_range)?));
            }
        }
        for (prob, fed) in branch_vectors {
            // Rebuild the learner for this branch by replaying the prefix.
            let mut next = inner_factory();
            for past in replay.iter() {
                next.observe(past)?;
            }
            next.observe(&fed)?;
            replay.push(fed);
            recurse(
                t + 1,
                weight * prob,
                &mut next,
                losses,
                epsilon,
                range,
                frame,
                inner_factory,
                replay,
            )?;
            replay.pop();
        }
        Ok(())
    }

    let mut learner = inner_factory();
    let mut replay: Vec<LossVector> = Vec::new();
    recurse(
        0,
        1.0,
        &mut learner,
        losses,
        epsilon,
        range,
        &mut frame,
        inner_factory,
        &mut replay,
    )?;
    Ok(frame.marginals)
}

/// Exact monotonicity check of the bandit reduction on a small instance:
/// all `(k+1)^T` exploration branches are enumerated for both sequences and
/// the marginal probability of playing the perturbed arm is compared at every
/// round after the perturbed cell.
pub fn check_mono_bandit_exact(
    inner_factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
    epsilon: f64,
    pair: &PerturbationPair,
    tol: f64,
) -> Result<MonotonicityVerdict> {
    let base = mono_bandit_marginals(inner_factory, epsilon, pair.base())?;
    let pert = mono_bandit_marginals(inner_factory, epsilon, &pair.perturbed())?;
    let arm = pair.arm();
    let rows: Vec<(usize, f64, f64)> = (pair.round() + 1..base.len())
        .map(|t| (t + 1, base[t][arm], pert[t][arm]))
        .collect();
    Ok(MonotonicityVerdict::from_rows(rows, tol))
}

/// Default sample count for the Monte Carlo monotonicity variant.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

/// Monte Carlo variant for instances too large to enumerate. A round is
/// flagged only when the one-sided 99% confidence bound on
/// `prob_base - prob_perturbed` excludes zero.
pub fn check_mono_bandit_monte_carlo(
    inner_factory: &dyn Fn() -> Box<dyn FullInfoLearner + Send>,
    epsilon: f64,
    pair: &PerturbationPair,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityVerdict> {
    use crate::rng::{SeededRng, StreamId};

    let horizon = pair.horizon();
    let arm = pair.arm();
    let range = pair
        .base()
        .iter()
        .fold(pair.base()[0].range(), |acc, lv| acc.union(&lv.range()));
    let perturbed = pair.perturbed();
    let pert_range = perturbed
        .iter()
        .fold(range, |acc, lv| acc.union(&lv.range()));

    let mut counts = vec![[0u64; 2]; horizon];
    for rep in 0..samples {
        for (which, losses) in [pair.base(), perturbed.as_slice()].iter().enumerate() {
            let inner = inner_factory();
            let mut mb = MonoBandit::new(inner, epsilon, pert_range)?;
            let mut rng_b = SeededRng::new(
                seed ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                StreamId::EXPLORATION.offset(which as u64),
            );
            let mut rng_f = SeededRng::new(
                seed ^ (rep as u64).wrapping_mul(0xD1B5_4A32_D192_ED03),
                StreamId::LEARNER.offset(which as u64),
            );
            for t in 0..horizon {
                let played = mb.round(&mut rng_b, &mut rng_f, |a| losses[t].get(a))?;
                if played.arm == arm {
                    counts[t][which] += 1;
                }
            }
        }
    }

    let n = samples as f64;
    let z99 = 2.326_347_874_040_841; // one-sided 99% normal quantile
    let mut rows = Vec::new();
    let mut max_violation = f64::NEG_INFINITY;
    for t in pair.round() + 1..horizon {
        let pb = counts[t][0] as f64 / n;
        let pp = counts[t][1] as f64 / n;
        let se = ((pb * (1.0 - pb) + pp * (1.0 - pp)) / n).sqrt();
        let gap = pb - pp;
        max_violation = max_violation.max(gap);
        if gap - z99 * se > 0.0 {
            rows.push((t + 1, pb, pp));
        }
    }
    Ok(MonotonicityVerdict {
        monotone: rows.is_empty(),
        violating_rounds: rows,
        max_violation,
    })
}

/// Seeded random perturbation pair for property suites: horizon up to
/// `max_horizon`, up to `max_arms` arms, losses uniform in the unit range,
/// one random cell decreased by a random positive delta (the perturbed value
/// may leave the unit range; the pair widens its declared range).
pub fn random_pair(seed: u64, max_horizon: usize, max_arms: usize) -> PerturbationPair {
    use crate::rng::{SeededRng, StreamId};
    let mut rng = SeededRng::new(seed, StreamId::ADVERSARY);
    let horizon = 1 + rng.next_index(max_horizon);
    let k = 2 + rng.next_index(max_arms.saturating_sub(1).max(1));
    let base: Vec<LossVector> = (0..horizon)
        .map(|_| {
            let values: Vec<f64> = (0..k).map(|_| rng.next_unit()).collect();
            LossVector::new(values, LossRange::UNIT).expect("unit range")
        })
        .collect();
    let round = rng.next_index(horizon);
    let arm = rng.next_index(k);
    let delta = 0.05 + 0.95 * rng.next_unit();
    PerturbationPair::new(base, round, arm, delta).expect("valid pair")
}

// ---------------------------------------------------------------------------
// Golden counterexample
// ---------------------------------------------------------------------------

/// The bundled non-monotonicity instance for the swap-regret learner:
/// `eta = 0.2`, `k = 3`, `T = 100`; base plays 50 rounds of `[-0.1, 1, 0]`
/// then 50 rounds of `[1, -1, 0]`, and the perturbed sequence lowers arm 1's
/// round-1 loss to `-2`.
pub fn counterexample_pair() -> PerturbationPair {
    let range = LossRange::new(-2.0, 1.0).unwrap();
    let mut base = Vec::with_capacity(100);
    for _ in 0..50 {
        base.push(LossVector::new(vec![-0.1, 1.0, 0.0], range).unwrap());
    }
    for _ in 0..50 {
        base.push(LossVector::new(vec![1.0, -1.0, 0.0], range).unwrap());
    }
    PerturbationPair::new(base, 0, 0, 1.9).unwrap()
}

pub const COUNTEREXAMPLE_ETA: f64 = 0.2;

/// Absolute tolerance for golden comparisons (8 published digits, double
/// precision across platforms).
pub const GOLDEN_TOL: f64 = 1e-6;

/// One section of the golden fixture: rows of (1-based round, k values).
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenSection {
    pub name: String,
    pub rows: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct GoldenFixture {
    pub base: GoldenSection,
    pub perturbed: GoldenSection,
    pub difference: GoldenSection,
}

const FIXTURE_V1: &str = include_str!("../fixtures/bm_golden_v1.txt");

/// Parses the bundled plain-text fixture.
pub fn golden_fixture() -> Result<GoldenFixture> {
    let mut sections: Vec<GoldenSection> = Vec::new();
    for line in FIXTURE_V1.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push(GoldenSection {
                name: name.to_string(),
                rows: Vec::new(),
            });
            continue;
        }
        let mut parts = line.split_whitespace();
        let round: usize = parts
            .next()
            .ok_or_else(|| CoreError::GoldenMismatch("missing round index".into()))?
            .parse()
            .map_err(|e| CoreError::GoldenMismatch(format!("bad round index: {e}")))?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse()
                    .map_err(|e| CoreError::GoldenMismatch(format!("bad value {p}: {e}")))
            })
            .collect::<Result<_>>()?;
        let section = sections
            .last_mut()
            .ok_or_else(|| CoreError::GoldenMismatch("row before any section".into()))?;
        section.rows.push((round, values));
    }
    let take = |name: &str| -> Result<GoldenSection> {
        sections
            .iter()
            .find(|s| s.name == name)
            .cloned()
            .ok_or_else(|| CoreError::GoldenMismatch(format!("missing section {name}")))
    };
    Ok(GoldenFixture {
        base: take("base")?,
        perturbed: take("perturbed")?,
        difference: take("difference")?,
    })
}

/// Result of regenerating the counterexample and comparing against the fixture.
#[derive(Debug, Clone)]
pub struct GoldenReport {
    /// Distribution rows after each round (1-based), base sequence.
    pub base_rows: Vec<Vec<f64>>,
    /// Distribution rows after each round (1-based), perturbed sequence.
    pub perturbed_rows: Vec<Vec<f64>>,
    /// Perturbed minus base, per round.
    pub difference_rows: Vec<Vec<f64>>,
    /// `(section, round, column, expected, got)` for entries off by more
    /// than [`GOLDEN_TOL`].
    pub mismatches: Vec<(String, usize, usize, f64, f64)>,
    /// Monotonicity verdict for the perturbed arm.
    pub verdict: MonotonicityVerdict,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn entries_checked(&self) -> usize {
        let f = golden_fixture().map(|f| {
            f.base.rows.iter().map(|r| r.1.len()).sum::<usize>()
                + f.perturbed.rows.iter().map(|r| r.1.len()).sum::<usize>()
                + f.difference.rows.iter().map(|r| r.1.len()).sum::<usize>()
        });
        f.unwrap_or(0)
    }
}

/// Regenerates the counterexample run and checks every fixture entry.
pub fn reproduce_counterexample() -> Result<GoldenReport> {
    let pair = counterexample_pair();
    let factory = || -> Box<dyn FullInfoLearner + Send> {
        Box::new(BlumMansour::new(3, COUNTEREXAMPLE_ETA).expect("valid parameters"))
    };
    let base = run_distributions(&factory, pair.base())?;
    let pert = run_distributions(&factory, &pair.perturbed())?;

    let base_rows: Vec<Vec<f64>> = base.iter().map(|d| d.probs().to_vec()).collect();
    let perturbed_rows: Vec<Vec<f64>> = pert.iter().map(|d| d.probs().to_vec()).collect();
    let difference_rows: Vec<Vec<f64>> = base_rows
        .iter()
        .zip(perturbed_rows.iter())
        .map(|(b, p)| b.iter().zip(p.iter()).map(|(bb, pp)| pp - bb).collect())
        .collect();

    let fixture = golden_fixture()?;
    let mut mismatches = Vec::new();
    let mut check = |section: &GoldenSection, computed: &[Vec<f64>]| {
        for (round, expected) in &section.rows {
            let got = &computed[round - 1];
            for (col, (&e, &g)) in expected.iter().zip(got.iter()).enumerate() {
                if (e - g).abs() > GOLDEN_TOL {
                    mismatches.push((section.name.clone(), *round, col, e, g));
                }
            }
        }
    };
    check(&fixture.base, &base_rows);
    check(&fixture.perturbed, &perturbed_rows);
    check(&fixture.difference, &difference_rows);

    let verdict = check_full_info(&factory, &pair, 1e-12)?;
    Ok(GoldenReport {
        base_rows,
        perturbed_rows,
        difference_rows,
        mismatches,
        verdict,
    })
}
