//! Exact enumeration of tiny restricted games.
//!
//! Agents here play grid-valued, non-responsive policies: functions of the
//! restricted transcript only, which collects the exogenous randomness of a
//! playout — realized states and the outcome-sampling draws. The outcome draw
//! is discretized exactly: every cumulative sampling threshold reachable on
//! the effort grid becomes a breakpoint of [0, 1], and the draw is replaced
//! by the interval it falls in, weighted by interval length. Every quantity
//! below is then a finite sum, so the subgame decomposition identity and
//! myopic-optimality checks hold to floating-point residuals.

use std::collections::BTreeMap;

use agentsel_core::rng::{SeededRng, StreamId};

use crate::agent::CostFn;
use crate::contract::Contract;
use crate::error::{Result, SimError};
use crate::model::OutcomeModel;

/// Cap on the number of enumerated randomness branches.
const BRANCH_CAP: u128 = 100_000;

/// Cap on the number of grid policies enumerated by the myopic check.
const POLICY_CAP: u128 = 200_000;

const DEDUP_TOL: f64 = 1e-12;

/// A restricted-transcript prefix: per past round, the realized state and
/// the index of the interval the outcome draw fell in.
pub type RestrictedPrefix = Vec<(usize, usize)>;

/// Principal-transcript prefix: per past round, the selected agent and the
/// realized outcome index.
pub type PrincipalPrefix = Vec<(usize, usize)>;

/// Deterministic tiny mechanism: constant, or an explicit table over
/// principal-transcript prefixes.
#[derive(Debug, Clone)]
pub enum TinyMechanism {
    Constant(usize),
    Table(BTreeMap<PrincipalPrefix, usize>),
}

impl TinyMechanism {
    fn select(&self, prefix: &PrincipalPrefix) -> Result<usize> {
        match self {
            TinyMechanism::Constant(i) => Ok(*i),
            TinyMechanism::Table(map) => map.get(prefix).copied().ok_or_else(|| {
                SimError::Config(format!("selection table has no entry for {prefix:?}"))
            }),
        }
    }
}

/// Materializes the greedy-by-cumulative-return rule into an explicit table
/// over every principal-transcript prefix up to the horizon. Raising any
/// past realized return of an agent only raises that agent's cumulative
/// total, so the rule (ties toward the smaller index) is monotone.
pub fn tabulate_greedy(model: &OutcomeModel, horizon: usize) -> TinyMechanism {
    let k = model.agents();
    let m = model.outcomes();
    let mut table = BTreeMap::new();
    let mut frontier: Vec<PrincipalPrefix> = vec![Vec::new()];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for prefix in frontier {
            let mut totals = vec![0.0f64; k];
            for &(arm, outcome) in &prefix {
                totals[arm] += model.outcome_return(outcome);
            }
            let mut best = 0usize;
            for i in 1..k {
                if totals[i] > totals[best] + DEDUP_TOL {
                    best = i;
                }
            }
            table.insert(prefix.clone(), best);
            for arm in 0..k {
                for outcome in 0..m {
                    let mut p = prefix.clone();
                    p.push((arm, outcome));
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    TinyMechanism::Table(table)
}

/// A grid policy: one default grid choice per round, plus prefix-keyed
/// overrides (how deviations are expressed).
#[derive(Debug, Clone)]
pub struct GridPolicy {
    default_by_round: Vec<usize>,
    overrides: BTreeMap<(usize, RestrictedPrefix), usize>,
}

impl GridPolicy {
    pub fn constant_per_round(choices: Vec<usize>) -> Self {
        GridPolicy {
            default_by_round: choices,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, round: usize, prefix: RestrictedPrefix, choice: usize) -> Self {
        self.overrides.insert((round, prefix), choice);
        self
    }

    pub fn choice(&self, round: usize, prefix: &RestrictedPrefix) -> usize {
        if let Some(&c) = self.overrides.get(&(round, prefix.clone())) {
            return c;
        }
        self.default_by_round[round]
    }
}

#[derive(Debug, Clone)]
pub struct TinyGameSpec {
    pub model: OutcomeModel,
    pub contract: Contract,
    pub costs: Vec<CostFn>,
    pub horizon: usize,
    /// Per-round distribution over states (the agents' known belief).
    pub state_dists: Vec<Vec<f64>>,
    /// Ascending effort grid within [0, 1].
    pub effort_grid: Vec<f64>,
    pub mechanism: TinyMechanism,
}

impl TinyGameSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.model.agents();
        if k > 2 {
            return Err(SimError::NotEnumerable(format!("{k} agents, cap 2")));
        }
        if self.model.outcomes() > 2 {
            return Err(SimError::NotEnumerable(format!(
                "{} outcomes, cap 2",
                self.model.outcomes()
            )));
        }
        if self.model.states() > 2 {
            return Err(SimError::NotEnumerable(format!(
                "{} states, cap 2",
                self.model.states()
            )));
        }
        if self.horizon == 0 || self.horizon > 3 {
            return Err(SimError::NotEnumerable(format!(
                "horizon {} outside 1..=3",
                self.horizon
            )));
        }
        if self.costs.len() != k {
            return Err(SimError::Config("one cost function per agent".into()));
        }
        if self.state_dists.len() != self.horizon {
            return Err(SimError::Config(
                "one state distribution per round".into(),
            ));
        }
        for dist in &self.state_dists {
            if dist.len() != self.model.states() {
                return Err(SimError::Config("state distribution size mismatch".into()));
            }
            let sum: f64 = dist.iter().sum();
            if dist.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(SimError::Config(
                    "state distributions must be probability vectors".into(),
                ));
            }
        }
        if self.effort_grid.is_empty() || self.effort_grid.len() > 5 {
            return Err(SimError::NotEnumerable(format!(
                "effort grid of {} levels, cap 5",
                self.effort_grid.len()
            )));
        }
        for w in self.effort_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(SimError::Config("effort grid must ascend".into()));
            }
        }
        if self.effort_grid[0] < 0.0 || *self.effort_grid.last().unwrap() > 1.0 {
            return Err(SimError::Config("effort grid must lie in [0, 1]".into()));
        }
        let branches = ((self.model.states() as u128) * (self.intervals().len() as u128))
            .checked_pow(self.horizon as u32)
            .unwrap_or(u128::MAX);
        if branches > BRANCH_CAP {
            return Err(SimError::NotEnumerable(format!(
                "{branches} randomness branches, cap {BRANCH_CAP}"
            )));
        }
        Ok(())
    }

    /// Exact partition of [0, 1] by every sampling threshold reachable on the
    /// grid; the outcome draw is equivalent to drawing one of these intervals
    /// with probability equal to its width.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0, 1.0];
        for agent in 0..self.model.agents() {
            for &effort in &self.effort_grid {
                for y in 0..self.model.states() {
                    cuts.extend(self.model.sampling_thresholds(agent, effort, y));
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
        cuts.windows(2)
            .filter(|w| w[1] - w[0] > DEDUP_TOL)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Exogenous probability of a restricted prefix (states times interval
    /// widths); independent of every policy.
    pub fn prefix_probability(&self, prefix: &RestrictedPrefix) -> f64 {
        let intervals = self.intervals();
        prefix
            .iter()
            .enumerate()
            .map(|(t, &(y, j))| {
                let py = self.state_dists[t].get(y).copied().unwrap_or(0.0);
                let w = intervals.get(j).map(|&(lo, hi)| hi - lo).unwrap_or(0.0);
                py * w
            })
            .product()
    }
}

struct PathState {
    restricted: RestrictedPrefix,
    principal: PrincipalPrefix,
}

/// Derives the deterministic playout of one round given the realized
/// (state, interval): who was selected, their effort and outcome.
fn derive_round(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    state: usize,
    interval_mid: f64,
    path: &PathState,
    round: usize,
) -> Result<(usize, f64, usize)> {
    let selected = spec.mechanism.select(&path.principal)?;
    if selected >= spec.model.agents() {
        return Err(SimError::Config(format!(
            "mechanism selected agent {selected}, model has {}",
            spec.model.agents()
        )));
    }
    let choice = policies[selected].choice(round, &path.restricted);
    let effort = *spec.effort_grid.get(choice).ok_or_else(|| {
        SimError::Config(format!("grid choice {choice} outside the effort grid"))
    })?;
    let outcome = spec.model.sample_outcome(selected, effort, state, interval_mid);
    Ok((selected, effort, outcome))
}

/// Expected utility of `agent` over rounds `from_round..T`, conditional on
/// the realized prefix, by exhaustive enumeration of the remaining exogenous
/// randomness.
pub fn exact_utility_from(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    prefix: &RestrictedPrefix,
    agent: usize,
) -> Result<f64> {
    spec.validate()?;
    if policies.len() != spec.model.agents() {
        return Err(SimError::Config("one policy per agent".into()));
    }
    let intervals = spec.intervals();
    let from_round = prefix.len();
    if from_round > spec.horizon {
        return Err(SimError::Config("prefix longer than the horizon".into()));
    }

    // Replay the prefix to reconstruct the principal transcript.
    let mut path = PathState {
        restricted: Vec::new(),
        principal: Vec::new(),
    };
    for (t, &(y, j)) in prefix.iter().enumerate() {
        let &(lo, hi) = intervals
            .get(j)
            .ok_or_else(|| SimError::Config(format!("interval {j} out of range")))?;
        let (sel, _, outcome) =
            derive_round(spec, policies, y, 0.5 * (lo + hi), &path, t)?;
        path.restricted.push((y, j));
        path.principal.push((sel, outcome));
    }

    fn recurse(
        spec: &TinyGameSpec,
        policies: &[GridPolicy],
        intervals: &[(f64, f64)],
        agent: usize,
        round: usize,
        path: &mut PathState,
        weight: f64,
    ) -> Result<f64> {
        if round == spec.horizon || weight == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (y, &py) in spec.state_dists[round].iter().enumerate() {
            if py == 0.0 {
                continue;
            }
            for (j, &(lo, hi)) in intervals.iter().enumerate() {
                let w = weight * py * (hi - lo);
                let (sel, effort, outcome) =
                    derive_round(spec, policies, y, 0.5 * (lo + hi), path, round)?;
                if sel == agent {
                    let payment = spec.contract.payment(spec.model.outcome_return(outcome));
                    total += w * (payment - spec.costs[agent].cost(effort));
                }
                path.restricted.push((y, j));
                path.principal.push((sel, outcome));
                total += recurse(spec, policies, intervals, agent, round + 1, path, w)?;
                path.restricted.pop();
                path.principal.pop();
            }
        }
        Ok(total)
    }

    recurse(
        spec,
        policies,
        &intervals,
        agent,
        from_round,
        &mut path,
        1.0,
    )
}

/// Expected total utility of `agent` under the policy profile.
pub fn exact_utility(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    agent: usize,
) -> Result<f64> {
    exact_utility_from(spec, policies, &Vec::new(), agent)
}

/// Monte Carlo estimate of the same quantity: `(mean, standard_error)`.
pub fn monte_carlo_utility(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    agent: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let intervals = spec.intervals();
    let mut rng = SeededRng::new(seed, StreamId::OUTCOME_BASE);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let mut path = PathState {
            restricted: Vec::new(),
            principal: Vec::new(),
        };
        let mut utility = 0.0;
        for t in 0..spec.horizon {
            let uy = rng.next_unit();
            let mut y = spec.state_dists[t].len() - 1;
            let mut cum = 0.0;
            for (s, &p) in spec.state_dists[t].iter().enumerate() {
                cum += p;
                if uy < cum {
                    y = s;
                    break;
                }
            }
            let u = rng.next_unit();
            let j = intervals
                .iter()
                .position(|&(lo, hi)| u >= lo && u < hi)
                .unwrap_or(intervals.len() - 1);
            let (sel, effort, outcome) = derive_round(spec, policies, y, u, &path, t)?;
            if sel == agent {
                let payment = spec.contract.payment(spec.model.outcome_return(outcome));
                utility += payment - spec.costs[agent].cost(effort);
            }
            path.restricted.push((y, j));
            path.principal.push((sel, outcome));
        }
        sum += utility;
        sum_sq += utility * utility;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// A single-prefix policy deviation.
#[derive(Debug, Clone)]
pub struct Deviation {
    pub agent: usize,
    pub round: usize,
    pub prefix: RestrictedPrefix,
    pub new_choice: usize,
}

/// Residual of the subgame decomposition identity: the total utility change
/// of a single-prefix deviation must equal the prefix probability times the
/// conditional subgame utility change.
pub fn check_subgame_decomposition(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    deviation: &Deviation,
) -> Result<f64> {
    if deviation.prefix.len() != deviation.round {
        return Err(SimError::Config(
            "deviation prefix length must equal its round".into(),
        ));
    }
    let mut deviated = policies.to_vec();
    deviated[deviation.agent] = deviated[deviation.agent]
        .clone()
        .with_override(deviation.round, deviation.prefix.clone(), deviation.new_choice);

    let total_change = exact_utility(spec, &deviated, deviation.agent)?
        - exact_utility(spec, policies, deviation.agent)?;
    let p = spec.prefix_probability(&deviation.prefix);
    if p == 0.0 {
        return Ok(total_change.abs());
    }
    let sub_change = exact_utility_from(spec, &deviated, &deviation.prefix, deviation.agent)?
        - exact_utility_from(spec, policies, &deviation.prefix, deviation.agent)?;
    Ok((total_change - p * sub_change).abs())
}

/// Reachable restricted prefixes per round (positive state probability,
/// positive interval width), in deterministic order.
pub fn reachable_prefixes(spec: &TinyGameSpec) -> Vec<(usize, RestrictedPrefix)> {
    let intervals = spec.intervals();
    let mut out: Vec<(usize, RestrictedPrefix)> = vec![(0, Vec::new())];
    let mut frontier: Vec<RestrictedPrefix> = vec![Vec::new()];
    for t in 0..spec.horizon.saturating_sub(1) {
        let mut next = Vec::new();
        for prefix in &frontier {
            for (y, &py) in spec.state_dists[t].iter().enumerate() {
                if py == 0.0 {
                    continue;
                }
                for j in 0..intervals.len() {
                    let mut p = prefix.clone();
                    p.push((y, j));
                    out.push((t + 1, p.clone()));
                    next.push(p);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Grid index of the smallest myopic-optimal effort for `agent` at round
/// `round` (single-round objective on the grid, ties toward smaller effort).
pub fn myopic_grid_choice(spec: &TinyGameSpec, agent: usize, round: usize) -> usize {
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (idx, &a) in spec.effort_grid.iter().enumerate() {
        let value = single_round_objective(spec, agent, round, a);
        if value > best_value + 1e-12 {
            best_value = value;
            best = idx;
        }
    }
    best
}

fn single_round_objective(spec: &TinyGameSpec, agent: usize, round: usize, effort: f64) -> f64 {
    let pay: f64 = spec.state_dists[round]
        .iter()
        .enumerate()
        .map(|(y, &py)| {
            py * spec
                .model
                .expected_over_outcomes(agent, effort, y, |r| spec.contract.payment(r))
        })
        .sum();
    pay - spec.costs[agent].cost(effort)
}

#[derive(Debug, Clone)]
pub struct MyopicCheck {
    pub policies_enumerated: u128,
    pub max_utility: f64,
    pub myopic_utility: f64,
}

impl MyopicCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.myopic_utility >= self.max_utility - tol
    }
}

/// Under the constant mechanism selecting `agent`, enumerates every grid
/// policy over reachable prefixes and verifies that playing the myopic grid
/// choice at every prefix attains the maximum utility.
pub fn check_myopic_under_constant(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    agent: usize,
) -> Result<MyopicCheck> {
    spec.validate()?;
    match spec.mechanism {
        TinyMechanism::Constant(i) if i == agent => {}
        _ => {
            return Err(SimError::Config(
                "myopic check needs the constant mechanism selecting the checked agent".into(),
            ))
        }
    }
    let prefixes = reachable_prefixes(spec);
    let g = spec.effort_grid.len() as u128;
    let count = g
        .checked_pow(prefixes.len() as u32)
        .unwrap_or(u128::MAX);
    if count > POLICY_CAP {
        return Err(SimError::NotEnumerable(format!(
            "{count} grid policies over {} prefixes, cap {POLICY_CAP}",
            prefixes.len()
        )));
    }

    let myopic_choices: Vec<usize> = (0..spec.horizon)
        .map(|t| myopic_grid_choice(spec, agent, t))
        .collect();
    let mut profile = policies.to_vec();
    profile[agent] = GridPolicy::constant_per_round(myopic_choices);
    let myopic_utility = exact_utility(spec, &profile, agent)?;

    let mut assignment = vec![0usize; prefixes.len()];
    let mut max_utility = f64::NEG_INFINITY;
    loop {
        let mut policy = GridPolicy::constant_per_round(vec![0; spec.horizon]);
        for ((round, prefix), &choice) in prefixes.iter().zip(assignment.iter()) {
            policy = policy.with_override(*round, prefix.clone(), choice);
        }
        profile[agent] = policy;
        let u = exact_utility(spec, &profile, agent)?;
        if u > max_utility {
            max_utility = u;
        }

        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                return Ok(MyopicCheck {
                    policies_enumerated: count,
                    max_utility,
                    myopic_utility,
                });
            }
            assignment[pos] += 1;
            if assignment[pos] < spec.effort_grid.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Best-response round-0 grid choices of `agent` (all maximizers within
/// `1e-12`), holding the rest of the profile fixed, together with the
/// myopic round-0 maximizer set.
pub fn round_zero_best_response(
    spec: &TinyGameSpec,
    policies: &[GridPolicy],
    agent: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let mut utilities = Vec::with_capacity(spec.effort_grid.len());
    for choice in 0..spec.effort_grid.len() {
        let mut profile = policies.to_vec();
        profile[agent] = profile[agent]
            .clone()
            .with_override(0, Vec::new(), choice);
        utilities.push(exact_utility(spec, &profile, agent)?);
    }
    let best = utilities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let br: Vec<usize> = (0..utilities.len())
        .filter(|&i| utilities[i] >= best - 1e-12)
        .collect();

    let mut values = Vec::with_capacity(spec.effort_grid.len());
    for &a in &spec.effort_grid {
        values.push(single_round_objective(spec, agent, 0, a));
    }
    let best_my = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let myopic: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] >= best_my - 1e-12)
        .collect();
    Ok((br, myopic))
}

/// Seeded random tiny spec: two agents, two outcomes, constant-or-greedy
/// mechanism, quadratic costs.
pub fn random_tiny_spec(seed: u64, greedy_mechanism: bool) -> TinyGameSpec {
    let mut rng = SeededRng::new(seed, StreamId::ADVERSARY);
    let states = 1 + rng.next_index(2);
    let horizon = 2 + rng.next_index(2);
    let grid_levels = 2 + rng.next_index(2);
    let low = -0.25 + 0.5 * rng.next_unit();
    let high = (low + 0.3 + 0.6 * rng.next_unit()).min(1.0);

    let mut slope = Vec::new();
    let mut intercept = Vec::new();
    for _ in 0..2 {
        let mut s_row = Vec::new();
        let mut b_row = Vec::new();
        for _ in 0..states {
            let b = 0.1 + 0.3 * rng.next_unit();
            let s = rng.next_unit() * (0.9 - b);
            s_row.push(s);
            b_row.push(b);
        }
        slope.push(s_row);
        intercept.push(b_row);
    }
    let model = OutcomeModel::two_outcome(low, high, slope, intercept).expect("valid by range");

    let mechanism = if greedy_mechanism {
        tabulate_greedy(&model, horizon)
    } else {
        TinyMechanism::Constant(0)
    };
    let grid: Vec<f64> = (0..grid_levels)
        .map(|i| i as f64 / (grid_levels - 1) as f64)
        .collect();
    let state_dists: Vec<Vec<f64>> = (0..horizon)
        .map(|_| {
            if states == 1 {
                vec![1.0]
            } else {
                let p = 0.2 + 0.6 * rng.next_unit();
                vec![p, 1.0 - p]
            }
        })
        .collect();
    TinyGameSpec {
        model,
        contract: Contract::linear(0.2 + 0.6 * rng.next_unit()).expect("in range"),
        costs: vec![
            CostFn::quadratic(0.1 + 0.4 * rng.next_unit()).expect("non-negative"),
            CostFn::quadratic(0.1 + 0.4 * rng.next_unit()).expect("non-negative"),
        ],
        horizon,
        state_dists,
        effort_grid: grid,
        mechanism,
    }
}

/// Seeded random tiny spec kept small enough for the full policy enumeration
/// of the myopic check: one state, horizon 2, grid of 3, constant mechanism.
pub fn random_myopic_spec(seed: u64, agent: usize) -> TinyGameSpec {
    let mut rng = SeededRng::new(seed, StreamId::ADVERSARY.offset(77));
    let low = -0.2 + 0.4 * rng.next_unit();
    let high = (low + 0.4 + 0.5 * rng.next_unit()).min(1.0);
    let mut slope = Vec::new();
    let mut intercept = Vec::new();
    for _ in 0..2 {
        let b = 0.1 + 0.3 * rng.next_unit();
        let s = rng.next_unit() * (0.9 - b);
        slope.push(vec![s]);
        intercept.push(vec![b]);
    }
    let model = OutcomeModel::two_outcome(low, high, slope, intercept).expect("valid by range");
    TinyGameSpec {
        model,
        contract: Contract::linear(0.3 + 0.5 * rng.next_unit()).expect("in range"),
        costs: vec![
            CostFn::quadratic(0.05 + 0.35 * rng.next_unit()).expect("non-negative"),
            CostFn::quadratic(0.05 + 0.35 * rng.next_unit()).expect("non-negative"),
        ],
        horizon: 2,
        state_dists: vec![vec![1.0], vec![1.0]],
        effort_grid: vec![0.0, 0.5, 1.0],
        mechanism: TinyMechanism::Constant(agent),
    }
}
