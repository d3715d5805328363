//! Strategy loops that drive agents through episodes, the random baseline and
//! the brute-force solution sampler.
//!
//! Agents never see the world directly. They answer [`PolicyQuery`]s, either
//! with a timing vector ([`TimingAgent`]) or with a distribution over the six
//! slots plus "do nothing" ([`StepAgent`]).

mod agents;
mod sampler;
mod timing;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Action, ActionSpace, EnvError, Env, EpisodeRecord, Observation};
use crate::games::{load_scene, GameError, Scene, MAX_ACTIONS};

pub use agents::{random_agent, FixedPlan, NoOpAgent, OracleAgent, PlanFollower, RandomAgent, ScriptedSteps};
pub use sampler::{sample_solutions, write_samples_jsonl, SampleResult, SampledSequence};
pub use timing::{TimingVector, SENTINEL};

/// Index of "do nothing" in a step distribution.
pub const NOOP_INDEX: usize = MAX_ACTIONS;

/// Tolerance on the sum of a step distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("malformed timing vector: {0}")]
    MalformedTiming(String),
    #[error("malformed action distribution: {0}")]
    MalformedDistribution(String),
    #[error("{strategy} needs a {needs} agent")]
    StrategyMismatch { strategy: Strategy, needs: &'static str },
    #[error("target must be at least 1")]
    InvalidTarget,
    #[error("budget exhausted after {} iterations with {} solutions", .0.iterations_used, .0.solutions.len())]
    BudgetExhausted(Box<SampleResult>),
    #[error("attempts per game must be at least 1")]
    NoAttempts,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    InAdvance,
    OnTheFly,
    Combined,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::InAdvance => "in-advance",
            Strategy::OnTheFly => "on-the-fly",
            Strategy::Combined => "combined",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "in-advance" => Ok(Strategy::InAdvance),
            "on-the-fly" => Ok(Strategy::OnTheFly),
            "combined" => Ok(Strategy::Combined),
            _ => Err(format!("unknown strategy `{s}` (in-advance, on-the-fly, combined)")),
        }
    }
}

/// Everything an agent is told before it answers.
#[derive(Debug, Clone)]
pub struct PolicyQuery {
    pub game: String,
    pub observation: Observation,
    pub action_space: ActionSpace,
    /// Control step about to be simulated.
    pub step: u32,
    pub max_steps: u32,
}

impl PolicyQuery {
    fn from_env(env: &Env) -> PolicyQuery {
        PolicyQuery {
            game: env.scene().game_id.name.clone(),
            observation: env.observation(),
            action_space: env.action_space().clone(),
            step: env.current_step(),
            max_steps: env.max_steps(),
        }
    }
}

/// Answers with six normalized timings (see [`TimingVector`]).
pub trait TimingAgent: Send {
    fn name(&self) -> String;
    fn plan(&mut self, query: &PolicyQuery) -> Vec<f64>;
    /// Called before each evaluation attempt with a derived seed.
    fn reset(&mut self, _seed: u64) {}
}

/// Answers with a distribution over the six slots and [`NOOP_INDEX`].
pub trait StepAgent: Send {
    fn name(&self) -> String;
    fn act(&mut self, query: &PolicyQuery) -> Vec<f64>;
    fn reset(&mut self, _seed: u64) {}
}

impl<T: TimingAgent + ?Sized> TimingAgent for &mut T {
    fn name(&self) -> String {
        (**self).name()
    }
    fn plan(&mut self, query: &PolicyQuery) -> Vec<f64> {
        (**self).plan(query)
    }
    fn reset(&mut self, seed: u64) {
        (**self).reset(seed)
    }
}

/// Either kind of agent, for code that picks the strategy at run time.
pub enum Agent {
    Timing(Box<dyn TimingAgent>),
    Step(Box<dyn StepAgent>),
}

impl Agent {
    pub fn name(&self) -> String {
        match self {
            Agent::Timing(a) => a.name(),
            Agent::Step(a) => a.name(),
        }
    }

    pub fn reset(&mut self, seed: u64) {
        match self {
            Agent::Timing(a) => a.reset(seed),
            Agent::Step(a) => a.reset(seed),
        }
    }
}

/// How on-the-fly distributions turn into actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Highest probability; ties go to the lowest index.
    #[default]
    Argmax,
    /// Draw from the distribution with a seeded generator.
    Sample { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub record: EpisodeRecord,
    pub strategy: Strategy,
    pub agent: String,
    /// Number of times the agent was queried.
    pub queries: u32,
}

fn finish(env: Env, strategy: Strategy, agent: String, queries: u32) -> RunResult {
    RunResult { record: env.record(), strategy, agent, queries }
}

/// Queries once on the initial scene and executes the plan open loop.
pub fn run_in_advance(agent: &mut dyn TimingAgent, game: &str) -> Result<RunResult, HarnessError> {
    run_in_advance_on(agent, load_scene(game)?)
}

pub fn run_in_advance_on(agent: &mut dyn TimingAgent, scene: Arc<Scene>) -> Result<RunResult, HarnessError> {
    let mut env = Env::new(scene);
    let plan = TimingVector::new(&agent.plan(&PolicyQuery::from_env(&env)))?;
    let max_steps = env.max_steps();
    let occupied = env.action_space().occupied();
    let mut schedule: Vec<(u32, usize)> =
        (0..occupied).filter_map(|i| plan.step(i, max_steps).map(|s| (s, i))).collect();
    schedule.sort_unstable();
    let mut next = 0;
    while !env.done() {
        let step = env.current_step();
        while next < schedule.len() && schedule[next].0 == step {
            env.eliminate_slot(schedule[next].1)?;
            next += 1;
        }
        env.advance()?;
    }
    Ok(finish(env, Strategy::InAdvance, agent.name(), 1))
}

/// Queries every control step and executes one choice per step.
pub fn run_on_the_fly(
    agent: &mut dyn StepAgent,
    game: &str,
    selection: Selection,
) -> Result<RunResult, HarnessError> {
    run_on_the_fly_on(agent, load_scene(game)?, selection)
}

pub fn run_on_the_fly_on(
    agent: &mut dyn StepAgent,
    scene: Arc<Scene>,
    selection: Selection,
) -> Result<RunResult, HarnessError> {
    let mut env = Env::new(scene);
    let mut rng = match selection {
        Selection::Sample { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Selection::Argmax => None,
    };
    let mut queries = 0;
    while !env.done() {
        let dist = agent.act(&PolicyQuery::from_env(&env));
        queries += 1;
        validate_distribution(&dist)?;
        let choice = match rng.as_mut() {
            Some(rng) => sample_index(&dist, rng.random::<f64>()),
            None => argmax(&dist),
        };
        let action = if choice == NOOP_INDEX { Action::NoOp } else { Action::Slot(choice) };
        env.step(action)?;
    }
    Ok(finish(env, Strategy::OnTheFly, agent.name(), queries))
}

/// Plans, executes the earliest pending elimination, and re-plans from the
/// new state. Ends when the agent answers all-"never" or the episode is over.
pub fn run_combined(agent: &mut dyn TimingAgent, game: &str) -> Result<RunResult, HarnessError> {
    run_combined_on(agent, load_scene(game)?)
}

pub fn run_combined_on(agent: &mut dyn TimingAgent, scene: Arc<Scene>) -> Result<RunResult, HarnessError> {
    let mut env = Env::new(scene);
    let occupied = env.action_space().occupied();
    let max_steps = env.max_steps();
    let mut queries = 0;
    while !env.done() {
        let plan = TimingVector::new(&agent.plan(&PolicyQuery::from_env(&env)))?;
        queries += 1;
        // Earliest still-available slot; ties go to the lower slot.
        let earliest = (0..occupied)
            .filter(|&i| env.slot_available(i))
            .filter_map(|i| plan.step(i, max_steps).map(|s| (s, i)))
            .min();
        let Some((step, slot)) = earliest else {
            env.run_to_end()?;
            break;
        };
        // A time already in the past executes right away.
        while env.current_step() < step && !env.done() {
            env.advance()?;
        }
        if env.done() {
            break;
        }
        env.eliminate_slot(slot)?;
    }
    Ok(finish(env, Strategy::Combined, agent.name(), queries))
}

/// Runs `agent` under `strategy`. Timing agents are adapted for on-the-fly play
/// with [`PlanFollower`]; step agents cannot plan ahead.
pub fn run_strategy(agent: &mut Agent, strategy: Strategy, scene: Arc<Scene>) -> Result<RunResult, HarnessError> {
    match (strategy, agent) {
        (Strategy::InAdvance, Agent::Timing(a)) => run_in_advance_on(a.as_mut(), scene),
        (Strategy::Combined, Agent::Timing(a)) => run_combined_on(a.as_mut(), scene),
        (Strategy::OnTheFly, Agent::Step(a)) => run_on_the_fly_on(a.as_mut(), scene, Selection::Argmax),
        (Strategy::OnTheFly, Agent::Timing(a)) => {
            let mut follower = PlanFollower::new(a.as_mut());
            run_on_the_fly_on(&mut follower, scene, Selection::Argmax)
        }
        (s, Agent::Step(_)) => Err(HarnessError::StrategyMismatch { strategy: s, needs: "timing" }),
    }
}

fn validate_distribution(dist: &[f64]) -> Result<(), HarnessError> {
    if dist.len() != MAX_ACTIONS + 1 {
        return Err(HarnessError::MalformedDistribution(format!(
            "expected {} entries, got {}",
            MAX_ACTIONS + 1,
            dist.len()
        )));
    }
    if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(HarnessError::MalformedDistribution(format!("invalid probability {p}")));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(HarnessError::MalformedDistribution(format!("probabilities sum to {sum}")));
    }
    Ok(())
}

fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

fn sample_index(dist: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left a sliver at the top; give it to the last non-zero entry.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(NOOP_INDEX)
}
