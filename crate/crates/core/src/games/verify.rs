use serde::{Deserialize, Serialize};

use super::Scene;
use crate::env::run_sequence;
use std::sync::Arc;

/// Outcome of simulating one reference solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCheck {
    pub index: usize,
    pub success: bool,
    pub final_reward: f64,
    pub eliminations: u32,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub game: String,
    pub solutions: Vec<SolutionCheck>,
}

impl VerificationReport {
    pub fn all_succeed(&self) -> bool {
        !self.solutions.is_empty() && self.solutions.iter().all(|s| s.success)
    }

    /// Highest reward among the reference solutions.
    pub fn best_reward(&self) -> f64 {
        self.solutions.iter().map(|s| s.final_reward).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Simulates every reference solution of a scene. Failures are reported, not raised.
pub fn verify_reference_solutions(scene: &Arc<Scene>) -> VerificationReport {
    let solutions = scene
        .reference_solutions
        .iter()
        .enumerate()
        .map(|(index, seq)| {
            let env = run_sequence(Arc::clone(scene), seq);
            let record = env.record();
            SolutionCheck {
                index,
                success: record.success,
                final_reward: record.final_reward,
                eliminations: record.eliminations,
                steps: record.steps,
            }
        })
        .collect();
    VerificationReport { game: scene.game_id.name.clone(), solutions }
}
