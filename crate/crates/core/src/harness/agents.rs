use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::games::{load_scene, Scene, MAX_ACTIONS};

use super::{PolicyQuery, TimingAgent, TimingVector, StepAgent, NOOP_INDEX, SENTINEL};

/// Uniform random timings: each slot is "never" with probability 1/2, otherwise
/// uniform over the control grid.
#[derive(Debug, Clone)]
pub struct RandomAgent {
    rng: ChaCha8Rng,
    max_steps: u32,
}

impl RandomAgent {
    pub fn new(seed: u64) -> RandomAgent {
        RandomAgent { rng: ChaCha8Rng::seed_from_u64(seed), max_steps: 150 }
    }

    /// Draws the next vector from the stream.
    pub fn draw(&mut self) -> TimingVector {
        let mut steps = [None; MAX_ACTIONS];
        for s in &mut steps {
            if !self.rng.random_bool(0.5) {
                *s = Some(self.rng.random_range(0..self.max_steps));
            }
        }
        TimingVector::from_steps(steps, self.max_steps)
    }
}

/// Shorthand for [`RandomAgent::new`].
pub fn random_agent(seed: u64) -> RandomAgent {
    RandomAgent::new(seed)
}

impl TimingAgent for RandomAgent {
    fn name(&self) -> String {
        "random".into()
    }

    fn reset(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn plan(&mut self, query: &PolicyQuery) -> Vec<f64> {
        self.max_steps = query.max_steps;
        self.draw().values().to_vec()
    }
}

/// Always answers with the same vector.
#[derive(Debug, Clone)]
pub struct FixedPlan(pub Vec<f64>);

impl FixedPlan {
    pub fn never() -> FixedPlan {
        FixedPlan(vec![SENTINEL; MAX_ACTIONS])
    }
}

impl TimingAgent for FixedPlan {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn plan(&mut self, _query: &PolicyQuery) -> Vec<f64> {
        self.0.clone()
    }
}

/// Replays the first reference solution of whichever game it is asked about.
#[derive(Debug, Default, Clone)]
pub struct OracleAgent {
    plans: HashMap<String, TimingVector>,
}

impl OracleAgent {
    pub fn new() -> OracleAgent {
        OracleAgent::default()
    }

    /// Registers a scene that is not part of the shipped library.
    pub fn with_scene(mut self, scene: &Scene) -> OracleAgent {
        self.plans.insert(scene.game_id.name.clone(), oracle_vector(scene));
        self
    }
}

fn oracle_vector(scene: &Scene) -> TimingVector {
    TimingVector::from_sequence(scene, &scene.reference_solutions[0])
}

impl TimingAgent for OracleAgent {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn plan(&mut self, query: &PolicyQuery) -> Vec<f64> {
        let plan = self.plans.entry(query.game.clone()).or_insert_with(|| {
            load_scene(&query.game).map(|s| oracle_vector(&s)).unwrap_or(TimingVector::NEVER)
        });
        plan.values().to_vec()
    }
}

/// Never acts.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoOpAgent;

impl StepAgent for NoOpAgent {
    fn name(&self) -> String {
        "noop".into()
    }

    fn act(&mut self, _query: &PolicyQuery) -> Vec<f64> {
        one_hot(NOOP_INDEX)
    }
}

impl TimingAgent for NoOpAgent {
    fn name(&self) -> String {
        "noop".into()
    }

    fn plan(&mut self, _query: &PolicyQuery) -> Vec<f64> {
        vec![SENTINEL; MAX_ACTIONS]
    }
}

/// Plays a fixed list of `(step, slot)` actions one per step.
#[derive(Debug, Clone, Default)]
pub struct ScriptedSteps(pub Vec<(u32, usize)>);

impl StepAgent for ScriptedSteps {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn act(&mut self, query: &PolicyQuery) -> Vec<f64> {
        match self.0.iter().find(|(s, _)| *s == query.step) {
            Some(&(_, slot)) => one_hot(slot),
            None => one_hot(NOOP_INDEX),
        }
    }
}

/// Drives a timing agent through the per-step interface: it plans on the first
/// query of an episode, then emits the earliest due slot each step (at most
/// one per step, so slots sharing a step go out on consecutive steps).
pub struct PlanFollower<A> {
    inner: A,
    pending: Vec<(u32, usize)>,
}

impl<A: TimingAgent> PlanFollower<A> {
    pub fn new(inner: A) -> Self {
        PlanFollower { inner, pending: Vec::new() }
    }
}

impl<A: TimingAgent> StepAgent for PlanFollower<A> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn reset(&mut self, seed: u64) {
        self.inner.reset(seed);
        self.pending.clear();
    }

    fn act(&mut self, query: &PolicyQuery) -> Vec<f64> {
        if query.step == 0 {
            let raw = self.inner.plan(query);
            let plan = TimingVector::new(&raw).unwrap_or(TimingVector::NEVER);
            let occupied = query.action_space.occupied();
            self.pending = (0..occupied).filter_map(|i| plan.step(i, query.max_steps).map(|s| (s, i))).collect();
            self.pending.sort_unstable();
        }
        match self.pending.first() {
            Some(&(s, slot)) if s <= query.step => {
                self.pending.remove(0);
                one_hot(slot)
            }
            _ => one_hot(NOOP_INDEX),
        }
    }
}

pub(crate) fn one_hot(index: usize) -> Vec<f64> {
    let mut v = vec![0.0; MAX_ACTIONS + 1];
    v[index] = 1.0;
    v
}
