//! Experiment configuration: one TOML file per experiment, structurally
//! validated, hashed for provenance.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use agentsel_sim::{Belief, Contract, CostFn, OutcomeModel, PolicyKind};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; overridden by `AGENTSEL_OUT_DIR` when set.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub base: u64,
    pub replicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerAlgorithm {
    ExpWeights,
    BlumMansour,
    TreeSwap,
    MonoBanditMw,
    MonoBanditTreeswap,
}

impl LearnerAlgorithm {
    pub fn is_bandit(self) -> bool {
        matches!(
            self,
            LearnerAlgorithm::MonoBanditMw | LearnerAlgorithm::MonoBanditTreeswap
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub algorithm: LearnerAlgorithm,
    /// Learning rate; tuned from the horizon when absent.
    pub eta: Option<f64>,
    /// Exploration probability; the bound-minimizing value when absent.
    pub epsilon: Option<f64>,
    /// Lazy-tree depth (tree-swap variants).
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossSuite {
    Iid,
    PhaseShift,
    MostPlayedPunisher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub arms: usize,
    pub horizon: usize,
    pub suite: LossSuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneSpec {
    pub pairs: usize,
    pub max_horizon: usize,
    pub max_arms: usize,
    pub tolerance: f64,
    /// When set, a result disagreeing with the expectation is a failure
    /// (exit code 2).
    pub expect_monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSource {
    /// Every round the same state.
    Constant { state: usize },
    /// Explicit realized sequence.
    Sequence { states: Vec<usize> },
    /// I.i.d. from fixed weights, drawn from the run seed.
    Iid { weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub low_return: f64,
    pub high_return: f64,
    /// `high_slope[agent][state]`, `high_intercept[agent][state]` of the
    /// high-outcome probability.
    pub high_slope: Vec<Vec<f64>>,
    pub high_intercept: Vec<Vec<f64>>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<OutcomeModel> {
        OutcomeModel::two_outcome(
            self.low_return,
            self.high_return,
            self.high_slope.clone(),
            self.high_intercept.clone(),
        )
        .context("invalid outcome model")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostSpec {
    Linear { c: f64 },
    Quadratic { gamma: f64 },
}

impl CostSpec {
    pub fn build(&self) -> Result<CostFn> {
        Ok(match self {
            CostSpec::Linear { c } => CostFn::linear(*c).context("invalid cost")?,
            CostSpec::Quadratic { gamma } => CostFn::quadratic(*gamma).context("invalid cost")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    Myopic,
    Boosted { delta: f64 },
    Fixed { effort: f64 },
}

impl PolicySpec {
    pub fn build(&self) -> PolicyKind {
        match self {
            PolicySpec::Myopic => PolicyKind::Myopic,
            PolicySpec::Boosted { delta } => PolicyKind::Boosted(*delta),
            PolicySpec::Fixed { effort } => PolicyKind::Fixed(*effort),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpecConfig {
    pub cost: CostSpec,
    pub policy: PolicySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MechanismSpec {
    Constant { arm: usize },
    MonoBanditMw { epsilon: Option<f64> },
    MonoBanditTreeswap { epsilon: Option<f64>, depth: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub horizon: usize,
    /// Linear contract share; exactly one of `alpha` and `concave_points`.
    pub alpha: Option<f64>,
    pub concave_points: Option<Vec<(f64, f64)>>,
    pub model: ModelSpec,
    pub agent: Vec<AgentSpecConfig>,
    pub mechanism: MechanismSpec,
    pub state_source: StateSource,
}

impl GameSpec {
    pub fn contract(&self) -> Result<Contract> {
        match (&self.alpha, &self.concave_points) {
            (Some(a), None) => Contract::linear(*a).context("invalid linear contract"),
            (None, Some(points)) => {
                Contract::piecewise_concave(points.clone()).context("invalid concave contract")
            }
            _ => bail!("specify exactly one of game.alpha and game.concave_points"),
        }
    }

    /// Realized state sequence for one replicate.
    pub fn states(&self, seed: u64) -> Result<Vec<usize>> {
        match &self.state_source {
            StateSource::Constant { state } => Ok(vec![*state; self.horizon]),
            StateSource::Sequence { states } => {
                if states.len() != self.horizon {
                    bail!(
                        "state sequence has {} rounds, horizon is {}",
                        states.len(),
                        self.horizon
                    );
                }
                Ok(states.clone())
            }
            StateSource::Iid { weights } => {
                use agentsel_core::rng::{SeededRng, StreamId};
                let total: f64 = weights.iter().sum();
                if weights.iter().any(|&w| w < 0.0) || total <= 0.0 {
                    bail!("state weights must be non-negative with positive total");
                }
                let mut rng = SeededRng::new(seed, StreamId::STATES);
                Ok((0..self.horizon)
                    .map(|_| {
                        let u = rng.next_unit() * total;
                        let mut cum = 0.0;
                        for (i, &w) in weights.iter().enumerate() {
                            cum += w;
                            if u < cum {
                                return i;
                            }
                        }
                        weights.len() - 1
                    })
                    .collect())
            }
        }
    }

    /// Per-agent belief: the realized sequence itself, the common-knowledge
    /// case all experiments here use.
    pub fn belief(&self, states: &[usize]) -> Belief {
        Belief::KnownSequence(states.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeskSpec {
    pub specs: usize,
    pub deviations_per_spec: usize,
    pub monte_carlo_samples: usize,
    pub residual_tolerance: f64,
}

/// One experiment: the `kind` tag selects the variant, mirroring the CLI's
/// subcommand-per-experiment layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    RegretBench {
        seeds: Seeds,
        learner: LearnerSpec,
        bench: BenchSpec,
        #[serde(default)]
        output: OutputSpec,
    },
    MonotoneCheck {
        seeds: Seeds,
        learner: LearnerSpec,
        check: MonotoneSpec,
        #[serde(default)]
        output: OutputSpec,
    },
    SimulateGame1 {
        seeds: Seeds,
        game: GameSpec,
        #[serde(default)]
        output: OutputSpec,
    },
    SimulateGame2 {
        seeds: Seeds,
        game: GameSpec,
        #[serde(default)]
        output: OutputSpec,
    },
    ReproAppendixB {
        #[serde(default)]
        output: OutputSpec,
    },
    DeskEq {
        seeds: Seeds,
        desk: DeskSpec,
        #[serde(default)]
        output: OutputSpec,
    },
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("config parse error")?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("config serialize error")
    }

    /// Provenance hash embedded in every output: SHA-256 of the canonical
    /// serialized form, hex-encoded.
    pub fn hash(&self) -> Result<String> {
        let canonical = self.to_toml()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn output(&self) -> &OutputSpec {
        match self {
            ExperimentConfig::RegretBench { output, .. }
            | ExperimentConfig::MonotoneCheck { output, .. }
            | ExperimentConfig::SimulateGame1 { output, .. }
            | ExperimentConfig::SimulateGame2 { output, .. }
            | ExperimentConfig::ReproAppendixB { output }
            | ExperimentConfig::DeskEq { output, .. } => output,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentConfig::RegretBench { .. } => "regret-bench",
            ExperimentConfig::MonotoneCheck { .. } => "monotone-check",
            ExperimentConfig::SimulateGame1 { .. } => "simulate-game1",
            ExperimentConfig::SimulateGame2 { .. } => "simulate-game2",
            ExperimentConfig::ReproAppendixB { .. } => "repro-appendix-b",
            ExperimentConfig::DeskEq { .. } => "desk-eq",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::RegretBench { seeds, learner, bench, .. } => {
                if seeds.replicates == 0 {
                    bail!("seeds.replicates must be positive");
                }
                if bench.arms < 2 || bench.horizon == 0 {
                    bail!("bench needs at least 2 arms and a positive horizon");
                }
                if let Some(eta) = learner.eta {
                    if eta <= 0.0 {
                        bail!("learner.eta must be positive");
                    }
                }
                if let Some(eps) = learner.epsilon {
                    if !(0.0..=1.0).contains(&eps) {
                        bail!("learner.epsilon must lie in [0, 1]");
                    }
                }
                if matches!(
                    learner.algorithm,
                    LearnerAlgorithm::TreeSwap | LearnerAlgorithm::MonoBanditTreeswap
                ) && learner.depth.is_none()
                {
                    bail!("tree-swap learners need learner.depth");
                }
                Ok(())
            }
            ExperimentConfig::MonotoneCheck { seeds, check, learner, .. } => {
                if seeds.replicates == 0 || check.pairs == 0 {
                    bail!("need at least one replicate and one pair");
                }
                if check.max_arms < 2 || check.max_horizon == 0 {
                    bail!("check needs max_arms >= 2 and a positive max_horizon");
                }
                if check.tolerance < 0.0 {
                    bail!("check.tolerance must be non-negative");
                }
                if learner.algorithm.is_bandit() && check.max_horizon > 8 {
                    bail!("bandit monotone checks enumerate branches; keep max_horizon <= 8");
                }
                Ok(())
            }
            ExperimentConfig::SimulateGame1 { seeds, game, .. } => {
                validate_game(seeds, game)
            }
            ExperimentConfig::SimulateGame2 { seeds, game, .. } => {
                validate_game(seeds, game)?;
                if game.alpha.is_none() {
                    bail!("the limited-liability game requires a linear contract (game.alpha)");
                }
                Ok(())
            }
            ExperimentConfig::ReproAppendixB { .. } => Ok(()),
            ExperimentConfig::DeskEq { seeds, desk, .. } => {
                if seeds.replicates == 0 || desk.specs == 0 {
                    bail!("need at least one replicate and one tiny spec");
                }
                if desk.monte_carlo_samples == 0 {
                    bail!("desk.monte_carlo_samples must be positive");
                }
                Ok(())
            }
        }
    }
}

fn validate_game(seeds: &Seeds, game: &GameSpec) -> Result<()> {
    if seeds.replicates == 0 {
        bail!("seeds.replicates must be positive");
    }
    if game.horizon == 0 {
        bail!("game.horizon must be positive");
    }
    if game.agent.is_empty() {
        bail!("configure at least one agent");
    }
    if game.model.high_slope.len() != game.agent.len() {
        bail!(
            "model covers {} agents, {} configured",
            game.model.high_slope.len(),
            game.agent.len()
        );
    }
    game.contract()?;
    game.model.build()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCH: &str = r#"
kind = "regret-bench"

[seeds]
base = 42
replicates = 30

[learner]
algorithm = "mono-bandit-mw"

[bench]
arms = 3
horizon = 10000
suite = "iid"
"#;

    const GAME: &str = r#"
kind = "simulate-game2"

[seeds]
base = 7
replicates = 30

[game]
horizon = 1000
alpha = 0.5
state_source = { kind = "constant", state = 0 }

[game.model]
low_return = 0.0
high_return = 1.0
high_slope = [[0.55], [0.2]]
high_intercept = [[0.4], [0.1]]

[[game.agent]]
cost = { kind = "quadratic", gamma = 0.3 }
policy = { kind = "myopic" }

[[game.agent]]
cost = { kind = "quadratic", gamma = 0.5 }
policy = { kind = "myopic" }

[game.mechanism]
kind = "mono-bandit-treeswap"
depth = 2
"#;

    #[test]
    fn config_round_trips() {
        for text in [BENCH, GAME] {
            let cfg = ExperimentConfig::parse(text).unwrap();
            let serialized = cfg.to_toml().unwrap();
            let reparsed = ExperimentConfig::parse(&serialized).unwrap();
            assert_eq!(cfg, reparsed);
            assert_eq!(cfg.hash().unwrap(), reparsed.hash().unwrap());
        }
    }

    #[test]
    fn hash_distinguishes_configs() {
        let a = ExperimentConfig::parse(BENCH).unwrap();
        let b = ExperimentConfig::parse(&BENCH.replace("10000", "20000")).unwrap();
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn invalid_configs_are_rejected_with_field_context() {
        let bad = BENCH.replace("arms = 3", "arms = 1");
        assert!(ExperimentConfig::parse(&bad).is_err());
        let bad = BENCH.replace("algorithm = \"mono-bandit-mw\"", "algorithm = \"nope\"");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(format!("{err:#}").contains("parse"));
        let bad = GAME.replace("alpha = 0.5", "");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn state_sources_materialize() {
        let cfg = ExperimentConfig::parse(GAME).unwrap();
        if let ExperimentConfig::SimulateGame2 { game, .. } = &cfg {
            let states = game.states(1).unwrap();
            assert_eq!(states, vec![0usize; 1000]);
        } else {
            panic!("parsed into the wrong variant");
        }
    }
}
