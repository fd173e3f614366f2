//! The repeated selection game loops.
//!
//! Game 1 pays the contract every round. Game 2 (linear contracts only)
//! defers all payments to per-agent tabs settled as `max(0, tab)` after the
//! final round, forgiving agent debt. Counterfactual efforts, outcomes, and
//! returns of unselected agents are drawn every round from their own streams
//! and recorded for evaluation only; the mechanism sees nothing but the
//! selected arm's realized return.

use agentsel_core::rng::{SeededRng, StreamId};

use crate::agent::{effort_for_round, AgentSpec, PolicyKind};
use crate::contract::Contract;
use crate::error::{Result, SimError};
use crate::mechanism::{utility_to_loss, SelectionMechanism, OUTSIDE_LOSS};
use crate::model::OutcomeModel;

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub spec: AgentSpec,
    pub policy: PolicyKind,
}

/// Per-agent deferred payment ledger of the limited-liability game.
#[derive(Debug, Clone, PartialEq)]
pub struct TabLedger {
    tabs: Vec<f64>,
    /// Smallest value each running tab ever took.
    running_min: Vec<f64>,
}

impl TabLedger {
    pub fn new(agents: usize) -> Self {
        TabLedger {
            tabs: vec![0.0; agents],
            running_min: vec![0.0; agents],
        }
    }

    pub fn accrue(&mut self, agent: usize, amount: f64) {
        self.tabs[agent] += amount;
        if self.tabs[agent] < self.running_min[agent] {
            self.running_min[agent] = self.tabs[agent];
        }
    }

    pub fn tab(&self, agent: usize) -> f64 {
        self.tabs[agent]
    }

    pub fn tabs(&self) -> &[f64] {
        &self.tabs
    }

    /// Final payout: debt is forgiven.
    pub fn payout(&self, agent: usize) -> f64 {
        self.tabs[agent].max(0.0)
    }

    pub fn payouts(&self) -> Vec<f64> {
        self.tabs.iter().map(|t| t.max(0.0)).collect()
    }

    /// True when the running tab never dipped below zero.
    pub fn never_negative(&self, agent: usize) -> bool {
        self.running_min[agent] >= 0.0
    }
}

/// One played round of either game.
#[derive(Debug, Clone)]
pub struct GameRound {
    pub round: usize,
    /// Selected arm; `agents` is the outside option.
    pub selected: usize,
    pub explored: Option<bool>,
    pub state: usize,
    /// Selected agent's effort (none on outside-option rounds).
    pub effort: Option<f64>,
    /// Selected agent's realized outcome index.
    pub outcome: Option<usize>,
    /// Realized return received by the principal (zero for outside).
    pub realized_return: f64,
    /// Payment this round (zero in the limited-liability game).
    pub payment: f64,
    /// Accrual-view principal utility `r - v(r)` (zero for outside).
    pub principal_utility: f64,
    /// Selected agent's flow utility this round.
    pub agent_utility: f64,
    /// Selected agent's tab after this round (limited-liability game only).
    pub tab_after: f64,
    /// Realized counterfactual returns of every agent this round
    /// (evaluation only; hidden from the mechanism).
    pub counterfactual_returns: Vec<f64>,
    /// Unit-range losses per arm (agents then outside) in the mechanism's
    /// reward-to-loss convention (evaluation only).
    pub arm_losses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    Standard,
    LimitedLiability,
}

#[derive(Debug, Clone)]
pub struct GameTranscript {
    pub kind: GameKind,
    pub agents: usize,
    pub rounds: Vec<GameRound>,
    /// Raw final tabs (limited-liability game only).
    pub final_tabs: Option<Vec<f64>>,
    /// Final payouts `max(0, tab)` (limited-liability game only).
    pub final_payouts: Option<Vec<f64>>,
    /// Per-agent flag: running tab never dipped below zero.
    pub tab_never_negative: Option<Vec<bool>>,
}

impl GameTranscript {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn outside_arm(&self) -> usize {
        self.agents
    }

    pub fn plays(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.selected).collect()
    }

    /// Settled total principal utility: in the standard game the per-round
    /// accruals already net out payments; in the limited-liability game the
    /// returns accrue during play and the payouts settle at the end.
    pub fn total_principal_utility(&self) -> f64 {
        match self.kind {
            GameKind::Standard => self.rounds.iter().map(|r| r.principal_utility).sum(),
            GameKind::LimitedLiability => {
                let returns: f64 = self.rounds.iter().map(|r| r.realized_return).sum();
                let payouts: f64 = self
                    .final_payouts
                    .as_ref()
                    .map(|p| p.iter().sum())
                    .unwrap_or(0.0);
                returns - payouts
            }
        }
    }

    /// Total payments actually made to `agent`.
    pub fn payments_to_agent(&self, agent: usize) -> f64 {
        match self.kind {
            GameKind::Standard => self
                .rounds
                .iter()
                .filter(|r| r.selected == agent)
                .map(|r| r.payment)
                .sum(),
            GameKind::LimitedLiability => self
                .final_payouts
                .as_ref()
                .map(|p| p[agent])
                .unwrap_or(0.0),
        }
    }

    /// Total effort cost borne by `agent` over their selected rounds.
    pub fn cost_of_agent(&self, agent: usize, agents: &[AgentConfig]) -> f64 {
        self.rounds
            .iter()
            .filter(|r| r.selected == agent)
            .map(|r| {
                agents[agent]
                    .spec
                    .cost
                    .cost(r.effort.expect("selected round has effort"))
            })
            .sum()
    }

    /// Settled total utility of `agent`.
    pub fn agent_total_utility(&self, agent: usize, agents: &[AgentConfig]) -> f64 {
        self.payments_to_agent(agent) - self.cost_of_agent(agent, agents)
    }

    /// Loss matrix over arms (agents then outside option) for regret meters.
    pub fn arm_loss_matrix(&self) -> Vec<Vec<f64>> {
        self.rounds.iter().map(|r| r.arm_losses.clone()).collect()
    }
}

fn validate_setup(
    mechanism: &dyn SelectionMechanism,
    model: &OutcomeModel,
    agents: &[AgentConfig],
    states: &[usize],
) -> Result<()> {
    let k = agents.len();
    if k == 0 {
        return Err(SimError::Config("no agents configured".into()));
    }
    if model.agents() != k {
        return Err(SimError::Config(format!(
            "model covers {} agents, {} configured",
            model.agents(),
            k
        )));
    }
    if mechanism.arms() != k + 1 {
        return Err(SimError::Config(format!(
            "mechanism has {} arms, expected {} agents + outside option",
            mechanism.arms(),
            k + 1
        )));
    }
    if states.is_empty() {
        return Err(SimError::Config("empty state sequence".into()));
    }
    for (t, &y) in states.iter().enumerate() {
        if y >= model.states() {
            return Err(SimError::Config(format!(
                "state {y} at round {t} outside alphabet of size {}",
                model.states()
            )));
        }
    }
    for cfg in agents {
        cfg.policy.validate()?;
    }
    Ok(())
}

fn run_game(
    kind: GameKind,
    mechanism: &mut dyn SelectionMechanism,
    model: &OutcomeModel,
    contract: &Contract,
    agents: &[AgentConfig],
    states: &[usize],
    seed: u64,
) -> Result<GameTranscript> {
    validate_setup(mechanism, model, agents, states)?;
    if kind == GameKind::LimitedLiability && !contract.is_linear() {
        return Err(SimError::Config(
            "the limited-liability game requires a linear contract".into(),
        ));
    }

    let k = agents.len();
    let outside = k;
    let horizon = states.len();
    let alpha = contract.linear_alpha().unwrap_or(0.0);
    let mut ledger = TabLedger::new(k);
    let mut outcome_rngs: Vec<SeededRng> = (0..k)
        .map(|i| SeededRng::new(seed, StreamId::OUTCOME_BASE.offset(i as u64)))
        .collect();
    let mut rounds = Vec::with_capacity(horizon);

    for (t, &y) in states.iter().enumerate() {
        let selection = mechanism.select();
        if selection.arm > outside {
            return Err(SimError::Config(format!(
                "mechanism selected arm {} beyond the outside option",
                selection.arm
            )));
        }

        // Non-responsive efforts for every agent, selected or not.
        let mut efforts = Vec::with_capacity(k);
        for (i, cfg) in agents.iter().enumerate() {
            let marginal = cfg.spec.belief.marginal(t, model.states())?;
            efforts.push(effort_for_round(
                cfg.policy, &cfg.spec, model, contract, i, &marginal,
            )?);
        }

        // One outcome draw per agent per round keeps stream positions
        // independent of the selection path.
        let mut outcomes = Vec::with_capacity(k);
        let mut returns = Vec::with_capacity(k);
        for i in 0..k {
            let u = outcome_rngs[i].next_unit();
            let o = model.sample_outcome(i, efforts[i], y, u);
            outcomes.push(o);
            returns.push(model.outcome_return(o));
        }

        let arm_losses: Vec<f64> = (0..=k)
            .map(|arm| {
                if arm == outside {
                    OUTSIDE_LOSS
                } else {
                    utility_to_loss(returns[arm] - contract.payment(returns[arm]))
                }
            })
            .collect();

        let (realized_return, effort, outcome) = if selection.arm == outside {
            (0.0, None, None)
        } else {
            (
                returns[selection.arm],
                Some(efforts[selection.arm]),
                Some(outcomes[selection.arm]),
            )
        };

        let (payment, tab_after, agent_utility, principal_utility) = if selection.arm == outside {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            let i = selection.arm;
            let cost = agents[i].spec.cost.cost(efforts[i]);
            match kind {
                GameKind::Standard => {
                    let pay = contract.payment(realized_return);
                    (pay, 0.0, pay - cost, realized_return - pay)
                }
                GameKind::LimitedLiability => {
                    ledger.accrue(i, alpha * realized_return);
                    (
                        0.0,
                        ledger.tab(i),
                        -cost,
                        realized_return - alpha * realized_return,
                    )
                }
            }
        };

        mechanism.observe_return(realized_return);

        rounds.push(GameRound {
            round: t,
            selected: selection.arm,
            explored: selection.explored,
            state: y,
            effort,
            outcome,
            realized_return,
            payment,
            principal_utility,
            agent_utility,
            tab_after,
            counterfactual_returns: returns,
            arm_losses,
        });
    }

    let (final_tabs, final_payouts, never_negative) = match kind {
        GameKind::Standard => (None, None, None),
        GameKind::LimitedLiability => (
            Some(ledger.tabs().to_vec()),
            Some(ledger.payouts()),
            Some((0..k).map(|i| ledger.never_negative(i)).collect()),
        ),
    };
    Ok(GameTranscript {
        kind,
        agents: k,
        rounds,
        final_tabs,
        final_payouts,
        tab_never_negative: never_negative,
    })
}

/// Standard selection game: the contract pays out every round.
pub fn play_game1(
    mechanism: &mut dyn SelectionMechanism,
    model: &OutcomeModel,
    contract: &Contract,
    agents: &[AgentConfig],
    states: &[usize],
    seed: u64,
) -> Result<GameTranscript> {
    run_game(
        GameKind::Standard,
        mechanism,
        model,
        contract,
        agents,
        states,
        seed,
    )
}

/// Limited-liability game: payments accrue to tabs, settled as
/// `max(0, tab)` after the final round. Linear contracts only.
pub fn play_game2(
    mechanism: &mut dyn SelectionMechanism,
    model: &OutcomeModel,
    contract: &Contract,
    agents: &[AgentConfig],
    states: &[usize],
    seed: u64,
) -> Result<GameTranscript> {
    run_game(
        GameKind::LimitedLiability,
        mechanism,
        model,
        contract,
        agents,
        states,
        seed,
    )
}
