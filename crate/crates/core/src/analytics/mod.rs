//! Split-level evaluation, sampling-based difficulty and failure attribution.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{load_split, Scene, Split};
use crate::harness::{run_strategy, sample_solutions, Agent, HarnessError, RunResult, Strategy};
use crate::physics::BodyId;

/// Sampling budget per game before a difficulty entry is reported as censored.
pub const DIFFICULTY_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("every game was solved, so failures cannot be attributed")]
    NoFailures,
    #[error("inconsistent counts: {0}")]
    InvalidCounts(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Seed for one attempt of one game. Independent of the attempt budget, so
/// attempt `k` plays the same way whether 1 or 5 attempts are allowed.
pub fn attempt_seed(seed: u64, game_index: usize, attempt: u32) -> u64 {
    // splitmix64 finalizer over the packed coordinates.
    let mut z = seed
        .wrapping_add((game_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(u64::from(attempt).wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameScore {
    pub game: String,
    /// Best reward over the attempts.
    pub best_reward: f64,
    /// Whether any attempt succeeded.
    pub success: bool,
    pub rewards: Vec<f64>,
    /// Elimination order (body ids) of the best attempt.
    pub best_order: Vec<BodyId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: Option<Split>,
    pub agent: String,
    pub strategy: Strategy,
    pub attempts_per_game: u32,
    pub games: Vec<GameScore>,
    /// Mean of per-game best rewards.
    pub mean_reward: f64,
    /// Percentage of games with at least one successful attempt.
    pub success_rate: f64,
}

impl SplitReport {
    fn assemble(split: Option<Split>, agent: String, strategy: Strategy, attempts: u32, games: Vec<GameScore>) -> Self {
        let n = games.len().max(1) as f64;
        let mean_reward = games.iter().map(|g| g.best_reward).sum::<f64>() / n;
        let success_rate = 100.0 * games.iter().filter(|g| g.success).count() as f64 / n;
        SplitReport { split, agent, strategy, attempts_per_game: attempts, games, mean_reward, success_rate }
    }

    pub fn game(&self, name: &str) -> Option<&GameScore> {
        self.games.iter().find(|g| g.game == name)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let split = self.split.map_or("all".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "{} / {} / {} ({} attempts per game)",
            self.agent, self.strategy, split, self.attempts_per_game
        );
        let _ = writeln!(out, "{:<26} {:>9} {:>8}", "game", "best", "solved");
        for g in &self.games {
            let _ = writeln!(out, "{:<26} {:>9.1} {:>8}", g.game, g.best_reward, if g.success { "yes" } else { "no" });
        }
        let _ = writeln!(out, "{:<26} {:>9.2} {:>7.1}%", "mean", self.mean_reward, self.success_rate);
        out
    }
}

/// Plays every game of `split` `attempts` times and keeps each game's best.
pub fn evaluate(
    agent: &mut Agent,
    strategy: Strategy,
    split: Split,
    attempts: u32,
    seed: u64,
) -> Result<SplitReport, AnalyticsError> {
    let scenes = load_split(Some(split)).map_err(HarnessError::from)?;
    let mut report = evaluate_scenes(agent, strategy, &scenes, attempts, seed)?;
    report.split = Some(split);
    Ok(report)
}

/// [`evaluate`] over an explicit list of scenes.
pub fn evaluate_scenes(
    agent: &mut Agent,
    strategy: Strategy,
    scenes: &[Arc<Scene>],
    attempts: u32,
    seed: u64,
) -> Result<SplitReport, AnalyticsError> {
    if attempts == 0 {
        return Err(HarnessError::NoAttempts.into());
    }
    let mut games = Vec::with_capacity(scenes.len());
    for (gi, scene) in scenes.iter().enumerate() {
        let mut best: Option<RunResult> = None;
        let mut rewards = Vec::with_capacity(attempts as usize);
        for attempt in 0..attempts {
            agent.reset(attempt_seed(seed, gi, attempt));
            let run = run_strategy(agent, strategy, scene.clone())?;
            rewards.push(run.record.final_reward);
            if best.as_ref().is_none_or(|b| run.record.final_reward > b.record.final_reward) {
                best = Some(run);
            }
        }
        let best = best.expect("at least one attempt");
        games.push(GameScore {
            game: scene.game_id.name.clone(),
            best_reward: best.record.final_reward,
            success: best.record.success,
            rewards,
            best_order: elimination_order(scene, &best),
        });
    }
    Ok(SplitReport::assemble(None, agent.name(), strategy, attempts, games))
}

/// Body ids an episode eliminated, in execution order.
pub fn elimination_order(scene: &Scene, run: &RunResult) -> Vec<BodyId> {
    let grays = scene.gray_ids();
    let mut order = Vec::new();
    for a in &run.record.actions {
        if let Some(&id) = grays.get(a.slot) {
            if !order.contains(&id) {
                order.push(id);
            }
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyEntry {
    pub game: String,
    /// Vectors sampled to collect the target; the budget when censored.
    pub iterations: u64,
    /// The budget ran out first; `iterations` is a lower bound.
    pub censored: bool,
    pub solutions_found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyProfile {
    pub target: usize,
    pub seed: u64,
    pub budget: u64,
    pub entries: Vec<DifficultyEntry>,
}

impl DifficultyProfile {
    pub fn iterations(&self, game: &str) -> Option<u64> {
        self.entries.iter().find(|e| e.game == game).map(|e| e.iterations)
    }

    /// Median iteration count (mean of the middle two for even counts).
    pub fn median(&self) -> f64 {
        let mut v: Vec<u64> = self.entries.iter().map(|e| e.iterations).collect();
        v.sort_unstable();
        match v.len() {
            0 => 0.0,
            n if n % 2 == 1 => v[n / 2] as f64,
            n => (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0,
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "iterations to {} distinct solutions (seed {})", self.target, self.seed);
        for e in &self.entries {
            let mark = if e.censored { ">=" } else { "" };
            let _ = writeln!(out, "{:<26} {:>2}{:>10}", e.game, mark, e.iterations);
        }
        out
    }
}

/// Sampling difficulty of each scene under the global budget.
pub fn difficulty_profile(
    scenes: &[Arc<Scene>],
    target: usize,
    seed: u64,
) -> Result<DifficultyProfile, AnalyticsError> {
    difficulty_profile_with_budget(scenes, target, seed, DIFFICULTY_BUDGET)
}

pub fn difficulty_profile_with_budget(
    scenes: &[Arc<Scene>],
    target: usize,
    seed: u64,
    budget: u64,
) -> Result<DifficultyProfile, AnalyticsError> {
    let mut entries = Vec::with_capacity(scenes.len());
    for scene in scenes {
        let entry = match sample_solutions(scene, target, budget, seed) {
            Ok(r) => DifficultyEntry {
                game: r.game_id,
                iterations: r.iterations_used,
                censored: false,
                solutions_found: r.solutions.len(),
            },
            Err(HarnessError::BudgetExhausted(r)) => DifficultyEntry {
                game: r.game_id,
                iterations: r.iterations_used,
                censored: true,
                solutions_found: r.solutions.len(),
            },
            Err(e) => return Err(e.into()),
        };
        entries.push(entry);
    }
    Ok(DifficultyProfile { target, seed, budget, entries })
}

/// How one game went, for failure attribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub game: String,
    pub solved: bool,
    /// Eliminated body ids in execution order.
    pub order: Vec<BodyId>,
}

impl From<&GameScore> for GameOutcome {
    fn from(g: &GameScore) -> Self {
        GameOutcome { game: g.game.clone(), solved: g.success, order: g.best_order.clone() }
    }
}

/// Splits failures into "right order, wrong timing" and "wrong order".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureAttribution {
    pub total: u32,
    /// Solved games.
    pub sn: u32,
    /// Games played in the oracle's order.
    pub ron: u32,
    /// Solved games played in the oracle's order.
    pub sron: u32,
    /// Share of failures with the right order, i.e. caused by timing.
    pub p_timing: f64,
    /// Share of failures with the wrong order.
    pub p_order: f64,
}

impl FailureAttribution {
    /// `P(T|F) = (RON − SRON) / (Total − SN)`, `P(O|F) = 1 − P(T|F)`.
    pub fn from_counts(total: u32, sn: u32, ron: u32, sron: u32) -> Result<Self, AnalyticsError> {
        if sn > total || ron > total || sron > sn.min(ron) {
            return Err(AnalyticsError::InvalidCounts(format!(
                "total={total} sn={sn} ron={ron} sron={sron}"
            )));
        }
        let failures = total - sn;
        if failures == 0 {
            return Err(AnalyticsError::NoFailures);
        }
        let right_order_failures = ron - sron;
        if right_order_failures > failures {
            return Err(AnalyticsError::InvalidCounts(format!(
                "{right_order_failures} right-order failures out of {failures} failures"
            )));
        }
        let p_timing = f64::from(right_order_failures) / f64::from(failures);
        let p_order = f64::from(failures - right_order_failures) / f64::from(failures);
        Ok(FailureAttribution { total, sn, ron, sron, p_timing, p_order })
    }
}

/// Counts SN, RON and SRON against the oracle orders and attributes failures.
/// Games without an oracle order count as wrong-order.
pub fn attribute_failures(
    results: &[GameOutcome],
    oracle_orders: &HashMap<String, Vec<BodyId>>,
) -> Result<FailureAttribution, AnalyticsError> {
    let total = results.len() as u32;
    let mut sn = 0;
    let mut ron = 0;
    let mut sron = 0;
    for r in results {
        let right = oracle_orders.get(&r.game).is_some_and(|o| *o == r.order);
        sn += u32::from(r.solved);
        ron += u32::from(right);
        sron += u32::from(r.solved && right);
    }
    FailureAttribution::from_counts(total, sn, ron, sron)
}

/// Canonical oracle orders of the given scenes, keyed by game name.
pub fn oracle_orders(scenes: &[Arc<Scene>]) -> HashMap<String, Vec<BodyId>> {
    scenes.iter().map(|s| (s.game_id.name.clone(), s.oracle_order.clone())).collect()
}
