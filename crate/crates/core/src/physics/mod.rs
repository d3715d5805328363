//! Fixed-timestep 2D rigid-body simulation for the puzzle scenes.
//!
//! Balls and capsule-shaped bars, pin joints, damped springs, gravity and
//! frictional contacts. Integration is semi-implicit Euler; contacts and joints
//! are resolved with sequential impulses. Everything iterates in body insertion
//! order, so a world stepped twice from the same state produces bit-identical
//! results.

mod body;
mod collide;
mod solver;
mod vec2;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use body::{Anchor, Body, BodyId, GoalRegion, Joint, JointKind, Role, Shape, Spring, SpringEnd};
pub use vec2::{closest_point_on_segment, Vec2};
pub use world::{Elimination, Status, World};

/// Observation rows are fixed at this count, so scenes may not exceed it.
pub const MAX_BODIES: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("body {0} cannot be eliminated")]
    NotEliminable(BodyId),
    #[error("body {0} was already eliminated")]
    AlreadyEliminated(BodyId),
    #[error("no body with id {0}")]
    UnknownBody(BodyId),
    #[error("the episode is over")]
    EpisodeOver,
    #[error("world is not running (status {0:?})")]
    NotRunning(Status),
    #[error("control step must be {expected} s, got {got} s")]
    ControlStep { expected: f64, got: f64 },
    #[error("invalid world: {0}")]
    InvalidWorld(String),
}

/// Simulation constants. Every scene file freezes its own copy in its header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    /// px/s², y down.
    pub gravity: Vec2,
    pub restitution: f64,
    /// Coulomb coefficient, shared by every contact.
    pub friction: f64,
    /// Mass per px² of shape area.
    #[serde(default = "defaults::density")]
    pub density: f64,
    /// Seconds per control (decision) step.
    pub control_dt: f64,
    pub substeps: u32,
    #[serde(default = "defaults::solver_iterations")]
    pub solver_iterations: u32,
    #[serde(default = "defaults::baumgarte")]
    pub baumgarte: f64,
    /// Penetration (px) tolerated before positional correction kicks in.
    #[serde(default = "defaults::linear_slop")]
    pub linear_slop: f64,
    #[serde(default = "defaults::bounce_threshold")]
    pub bounce_threshold: f64,
    #[serde(default = "defaults::episode_seconds")]
    pub episode_seconds: f64,
}

mod defaults {
    pub fn density() -> f64 {
        1.0
    }
    pub fn solver_iterations() -> u32 {
        8
    }
    pub fn baumgarte() -> f64 {
        0.2
    }
    pub fn linear_slop() -> f64 {
        0.5
    }
    pub fn bounce_threshold() -> f64 {
        30.0
    }
    pub fn episode_seconds() -> f64 {
        15.0
    }
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            gravity: Vec2::new(0.0, 900.0),
            restitution: 0.1,
            friction: 0.5,
            density: defaults::density(),
            control_dt: 0.1,
            substeps: 10,
            solver_iterations: defaults::solver_iterations(),
            baumgarte: defaults::baumgarte(),
            linear_slop: defaults::linear_slop(),
            bounce_threshold: defaults::bounce_threshold(),
            episode_seconds: defaults::episode_seconds(),
        }
    }
}

impl PhysicsParams {
    /// Control steps in a full episode (150 with the defaults).
    pub fn max_steps(&self) -> u32 {
        (self.episode_seconds / self.control_dt).round() as u32
    }

    pub fn substep_dt(&self) -> f64 {
        self.control_dt / f64::from(self.substeps)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let ok = self.gravity.is_finite()
            && self.control_dt > 0.0
            && self.substeps > 0
            && self.solver_iterations > 0
            && self.density > 0.0
            && (0.0..=1.0).contains(&self.restitution)
            && self.friction >= 0.0
            && self.episode_seconds >= self.control_dt;
        if ok {
            Ok(())
        } else {
            Err(PhysicsError::InvalidWorld(format!("bad physics parameters {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests;
