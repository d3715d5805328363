use std::collections::HashSet;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{episode_reward_tenths, tenths_to_points};
use crate::games::Scene;
use crate::physics::Status;

use super::{HarnessError, RandomAgent, TimingVector};

/// Vectors drawn per parallel batch. Results are merged in draw order, so the
/// outcome does not depend on the thread count.
const BATCH: usize = 512;

/// One sampled vector and how it played out; the dataset export row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSequence {
    pub game_id: String,
    pub timing_vector: TimingVector,
    pub success: bool,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub game_id: String,
    /// Distinct successful vectors, in discovery order.
    pub solutions: Vec<SampledSequence>,
    /// The first failures seen, capped at the target count.
    pub failures: Vec<SampledSequence>,
    /// Vectors simulated until the target was met (or the budget).
    pub iterations_used: u64,
    /// Set when the budget ran out before the target.
    pub exhausted: bool,
}

/// Draws random timing vectors until `target` distinct successes turn up.
///
/// Two vectors are the same solution when they put every occupied slot on the
/// same control step. Running out of budget returns
/// [`HarnessError::BudgetExhausted`] carrying the partial result.
pub fn sample_solutions(
    scene: &Arc<Scene>,
    target: usize,
    budget: u64,
    seed: u64,
) -> Result<SampleResult, HarnessError> {
    if target == 0 {
        return Err(HarnessError::InvalidTarget);
    }
    let game_id = scene.game_id.name.clone();
    let mut result = SampleResult {
        game_id: game_id.clone(),
        solutions: Vec::new(),
        failures: Vec::new(),
        iterations_used: 0,
        exhausted: false,
    };
    let max_steps = scene.params.max_steps();
    let occupied = scene.gray_ids().len();
    let mut agent = RandomAgent::new(seed);
    let mut seen = HashSet::new();

    while result.iterations_used < budget {
        let n = BATCH.min((budget - result.iterations_used) as usize);
        let batch: Vec<TimingVector> = (0..n).map(|_| agent.draw()).collect();
        let outcomes: Vec<(bool, i64)> = batch.par_iter().map(|v| simulate_plan(scene, v)).collect();
        for (v, (success, tenths)) in batch.into_iter().zip(outcomes) {
            result.iterations_used += 1;
            let row = SampledSequence {
                game_id: game_id.clone(),
                timing_vector: v,
                success,
                reward: tenths_to_points(tenths),
            };
            if success {
                if seen.insert(v.grid_key(occupied, max_steps)) {
                    result.solutions.push(row);
                    if result.solutions.len() >= target {
                        return Ok(result);
                    }
                }
            } else if result.failures.len() < target {
                result.failures.push(row);
            }
        }
    }
    result.exhausted = true;
    Err(HarnessError::BudgetExhausted(Box::new(result)))
}

/// Plays a vector in-advance on a bare world; returns success and reward in
/// tenths. Same schedule as [`super::run_in_advance`] without the bookkeeping.
pub(crate) fn simulate_plan(scene: &Scene, plan: &TimingVector) -> (bool, i64) {
    let mut world = scene.build_world();
    let seq = plan.to_sequence(scene);
    let dt = scene.params.control_dt;
    let mut next = 0;
    let mut eliminations = 0;
    loop {
        let step = world.steps();
        while next < seq.entries.len() && seq.entries[next].step == step {
            world.eliminate(seq.entries[next].body).expect("slot bodies are gray and present");
            eliminations += 1;
            next += 1;
        }
        match world.step(dt).expect("world is running") {
            Status::Running => {}
            status => {
                let success = status == Status::Success;
                return (success, episode_reward_tenths(success, eliminations, world.steps()));
            }
        }
    }
}

/// Writes sampled rows as JSON lines.
pub fn write_samples_jsonl<'a>(path: &Path, rows: impl IntoIterator<Item = &'a SampledSequence>) -> io::Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
