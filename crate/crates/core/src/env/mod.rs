//! Episode state machine: observations, actions, rewards and termination.
//!
//! Each control step costs 0.1 points of time (one point per second), every
//! gray block eliminated costs 10, and reaching the goal pays 1000. Rewards are
//! tracked internally in integer tenths so episode totals are exact.

mod observation;
mod record;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{load_scene, GameError, Scene, TimedActionSequence, MAX_ACTIONS};
use crate::physics::{BodyId, PhysicsError, Status, World};

pub use observation::{encode_observation, ActionSlot, ActionSpace, Observation, FEATURES};
pub use record::{read_jsonl, replay, write_jsonl, append_jsonl, Digest, EpisodeRecord, RecordedAction, ReplayError, RECORD_VERSION};

/// Reward for reaching the goal, in tenths.
pub const SUCCESS_TENTHS: i64 = 10_000;
/// Cost of one elimination, in tenths.
pub const ELIMINATION_TENTHS: i64 = 100;
/// Time cost per second, in tenths.
pub const TIME_TENTHS_PER_SECOND: i64 = 10;

/// Reward of a finished episode in tenths: `1000·success − 10·K − 0.1·S`.
pub fn episode_reward_tenths(success: bool, eliminations: u32, steps: u32) -> i64 {
    i64::from(success) * SUCCESS_TENTHS - ELIMINATION_TENTHS * i64::from(eliminations) - i64::from(steps)
}

pub fn tenths_to_points(tenths: i64) -> f64 {
    tenths as f64 / 10.0
}

/// What an agent does in one control step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    NoOp,
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub success: bool,
    /// Eliminations so far in the episode.
    pub eliminations: u32,
    /// Elapsed time after the step, in seconds.
    pub t: f64,
    pub invalid_action: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("the episode is over")]
    EpisodeOver,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// One running episode of one scene.
#[derive(Debug, Clone)]
pub struct Env {
    scene: Arc<Scene>,
    action_space: ActionSpace,
    world: World,
    seed: u64,
    step_tenths: i64,
    // Since the last `advance`.
    pending_eliminations: u32,
    pending_invalid: bool,
    eliminations: u32,
    total_tenths: i64,
    actions: Vec<RecordedAction>,
    rewards: Vec<f64>,
    digests: Vec<Digest>,
}

/// Starts an episode of a shipped game.
pub fn reset(game: &str) -> Result<(Observation, Env), EnvError> {
    let env = Env::new(load_scene(game)?);
    Ok((env.observation(), env))
}

impl Env {
    pub fn new(scene: Arc<Scene>) -> Env {
        let world = scene.build_world();
        let step_tenths = (scene.params.control_dt * TIME_TENTHS_PER_SECOND as f64).round() as i64;
        Env {
            action_space: ActionSpace::for_scene(&scene),
            scene,
            world,
            seed: 0,
            step_tenths,
            pending_eliminations: 0,
            pending_invalid: false,
            eliminations: 0,
            total_tenths: 0,
            actions: Vec::new(),
            rewards: Vec::new(),
            digests: Vec::new(),
        }
    }

    /// Tags the episode record with the seed of whatever drove it.
    pub fn with_seed(mut self, seed: u64) -> Env {
        self.seed = seed;
        self
    }

    pub fn scene(&self) -> &Arc<Scene> {
        &self.scene
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.action_space
    }

    pub fn observation(&self) -> Observation {
        encode_observation(&self.world)
    }

    pub fn done(&self) -> bool {
        self.world.status() != Status::Running
    }

    pub fn status(&self) -> Status {
        self.world.status()
    }

    /// Index of the control step about to be simulated.
    pub fn current_step(&self) -> u32 {
        self.world.steps()
    }

    pub fn max_steps(&self) -> u32 {
        self.scene.params.max_steps()
    }

    pub fn eliminations(&self) -> u32 {
        self.eliminations
    }

    pub fn total_reward(&self) -> f64 {
        tenths_to_points(self.total_tenths)
    }

    pub fn total_reward_tenths(&self) -> i64 {
        self.total_tenths
    }

    /// Whether `slot` currently names a gray block that can be removed.
    pub fn slot_available(&self, slot: usize) -> bool {
        self.slot_body(slot)
            .and_then(|id| self.world.index_of(id))
            .is_some_and(|i| !self.world.is_removed(i))
    }

    fn slot_body(&self, slot: usize) -> Option<BodyId> {
        self.action_space.slots.get(slot).and_then(ActionSlot::body)
    }

    /// Requests an elimination for the current control step. It takes effect
    /// immediately, before the step's first substep. Returns `false` (and flags
    /// the step as invalid) for padding slots and blocks already gone.
    pub fn eliminate_slot(&mut self, slot: usize) -> Result<bool, EnvError> {
        if self.done() {
            return Err(EnvError::EpisodeOver);
        }
        let step = self.current_step();
        if slot < MAX_ACTIONS {
            self.actions.push(RecordedAction { step, slot });
        }
        let Some(id) = self.slot_body(slot) else {
            self.pending_invalid = true;
            return Ok(false);
        };
        match self.world.eliminate(id) {
            Ok(()) => {
                self.pending_eliminations += 1;
                Ok(true)
            }
            Err(PhysicsError::EpisodeOver) => Err(EnvError::EpisodeOver),
            Err(_) => {
                self.pending_invalid = true;
                Ok(false)
            }
        }
    }

    /// Eliminates a body by id, surfacing the exact physics error for
    /// interactive clients. Valid requests are recorded against their slot.
    pub fn eliminate_body(&mut self, id: BodyId) -> Result<(), PhysicsError> {
        self.world.eliminate(id)?;
        let slot = self.scene.slot_of(id).expect("eliminable bodies have a slot");
        self.actions.push(RecordedAction { step: self.current_step(), slot });
        self.pending_eliminations += 1;
        Ok(())
    }

    /// Simulates one control step and settles its reward.
    pub fn advance(&mut self) -> Result<StepOutcome, EnvError> {
        if self.done() {
            return Err(EnvError::EpisodeOver);
        }
        let dt = self.scene.params.control_dt;
        let status = self.world.step(dt).map_err(|_| EnvError::EpisodeOver)?;
        let success = status == Status::Success;
        let tenths = -self.step_tenths - ELIMINATION_TENTHS * i64::from(self.pending_eliminations)
            + if success { SUCCESS_TENTHS } else { 0 };
        self.eliminations += self.pending_eliminations;
        self.total_tenths += tenths;
        let invalid_action = self.pending_invalid;
        self.pending_eliminations = 0;
        self.pending_invalid = false;
        let reward = tenths_to_points(tenths);
        self.rewards.push(reward);
        self.digests.push(Digest(self.world.state_hash()));
        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            done: status != Status::Running,
            info: StepInfo { success, eliminations: self.eliminations, t: self.world.time(), invalid_action },
        })
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        match action {
            Action::NoOp => self.step_slots(&[]),
            Action::Slot(s) => self.step_slots(&[s]),
        }
    }

    /// Applies several eliminations in the given order, then advances.
    pub fn step_slots(&mut self, slots: &[usize]) -> Result<StepOutcome, EnvError> {
        if self.done() {
            return Err(EnvError::EpisodeOver);
        }
        for &s in slots {
            self.eliminate_slot(s)?;
        }
        self.advance()
    }

    /// Steps with no action until the episode ends.
    pub fn run_to_end(&mut self) -> Result<(), EnvError> {
        while !self.done() {
            self.advance()?;
        }
        Ok(())
    }

    /// Snapshot of everything needed to replay this episode so far.
    pub fn record(&self) -> EpisodeRecord {
        EpisodeRecord {
            format_version: RECORD_VERSION,
            game_id: self.scene.game_id.name.clone(),
            seed: self.seed,
            actions: self.actions.clone(),
            rewards: self.rewards.clone(),
            final_reward: self.total_reward(),
            success: self.world.status() == Status::Success,
            eliminations: self.eliminations,
            steps: self.world.steps(),
            digests: self.digests.clone(),
        }
    }
}

/// Plays a timed sequence open loop to the end of the episode. Eliminations
/// sharing a step run in ascending slot order; entries naming non-gray bodies
/// are skipped.
pub fn run_sequence(scene: Arc<Scene>, seq: &TimedActionSequence) -> Env {
    let mut plan: Vec<(u32, usize)> = seq
        .entries
        .iter()
        .filter_map(|a| scene.slot_of(a.body).map(|slot| (a.step, slot)))
        .collect();
    plan.sort_unstable();
    let mut env = Env::new(scene);
    let mut next = plan.iter().peekable();
    while !env.done() {
        let step = env.current_step();
        while let Some(&&(s, slot)) = next.peek() {
            if s > step {
                break;
            }
            next.next();
            if s == step {
                env.eliminate_slot(slot).expect("episode is running");
            }
        }
        env.advance().expect("episode is running");
    }
    env
}
