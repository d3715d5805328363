//! The 40 puzzle scenes, their roster and validation.
//!
//! Scenes ship as JSON files compiled into the library (see `scenes/`), one
//! per game. Each file freezes its physics constants and carries at least one
//! reference solution.

mod scene;
mod verify;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scene::{
    OrderDemo, Scene, SceneFile, TimedAction, TimedActionSequence, TimingProbe, FORMAT_VERSION, MAX_ACTIONS,
};
pub use verify::{verify_reference_solutions, SolutionCheck, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Basic,
    Noisy,
    Compositional,
    MultiBall,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Basic, Split::Noisy, Split::Compositional, Split::MultiBall];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Basic => "basic",
            Split::Noisy => "noisy",
            Split::Compositional => "compositional",
            Split::MultiBall => "multi_ball",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self, GameError> {
        match s.replace('-', "_").as_str() {
            "basic" => Ok(Split::Basic),
            "noisy" => Ok(Split::Noisy),
            "compositional" => Ok(Split::Compositional),
            "multi_ball" | "multiball" => Ok(Split::MultiBall),
            _ => Err(GameError::UnknownSplit(s.to_string())),
        }
    }
}

/// A game of the roster, e.g. `support` or `multi_ball_hinder`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GameId {
    pub split: Split,
    pub name: String,
}

impl GameId {
    /// Looks a name up in the roster.
    pub fn parse(name: &str) -> Result<GameId, GameError> {
        ROSTER
            .iter()
            .find(|(_, n)| *n == name)
            .map(|(split, n)| GameId { split: *split, name: (*n).to_string() })
            .ok_or_else(|| GameError::UnknownGame(name.to_string()))
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unknown split `{0}`")]
    UnknownSplit(String),
    #[error("scene `{game}` is invalid: {reason}")]
    SceneInvalid { game: String, reason: String },
}

const ROSTER: [(Split, &str); 40] = [
    (Split::Basic, "support"),
    (Split::Basic, "hinder"),
    (Split::Basic, "direction"),
    (Split::Basic, "hole"),
    (Split::Basic, "fill"),
    (Split::Basic, "seesaw"),
    (Split::Basic, "angle"),
    (Split::Basic, "impulse"),
    (Split::Basic, "pendulum"),
    (Split::Basic, "spring"),
    (Split::Noisy, "noisy_support"),
    (Split::Noisy, "noisy_hinder"),
    (Split::Noisy, "noisy_direction"),
    (Split::Noisy, "noisy_hole"),
    (Split::Noisy, "noisy_fill"),
    (Split::Noisy, "noisy_seesaw"),
    (Split::Noisy, "noisy_angle"),
    (Split::Noisy, "noisy_impulse"),
    (Split::Noisy, "noisy_pendulum"),
    (Split::Noisy, "noisy_spring"),
    (Split::Compositional, "support_hinder"),
    (Split::Compositional, "support_direction"),
    (Split::Compositional, "support_hole"),
    (Split::Compositional, "more_step_hole"),
    (Split::Compositional, "hinder_fill"),
    (Split::Compositional, "impulse_spring"),
    (Split::Compositional, "impulse_pendulum"),
    (Split::Compositional, "activated_pendulum"),
    (Split::Compositional, "spring_flick"),
    (Split::Compositional, "seesaw_angle"),
    (Split::MultiBall, "multi_ball_stack"),
    (Split::MultiBall, "multi_ball_hinder"),
    (Split::MultiBall, "multi_ball_redirect"),
    (Split::MultiBall, "multi_ball_hole"),
    (Split::MultiBall, "multi_ball_fill"),
    (Split::MultiBall, "multi_ball_lever"),
    (Split::MultiBall, "multi_ball_angle"),
    (Split::MultiBall, "multi_ball_pendulum"),
    (Split::MultiBall, "multi_ball_spring"),
    (Split::MultiBall, "multi_ball_spring_flick"),
];

macro_rules! scene_sources {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenes/", $name, ".json")))),*]
    };
}

/// Raw JSON of every shipped scene, in roster order.
pub const SCENE_SOURCES: &[(&str, &str)] = scene_sources![
    "support", "hinder", "direction", "hole", "fill", "seesaw", "angle", "impulse", "pendulum", "spring",
    "noisy_support", "noisy_hinder", "noisy_direction", "noisy_hole", "noisy_fill", "noisy_seesaw",
    "noisy_angle", "noisy_impulse", "noisy_pendulum", "noisy_spring",
    "support_hinder", "support_direction", "support_hole", "more_step_hole", "hinder_fill",
    "impulse_spring", "impulse_pendulum", "activated_pendulum", "spring_flick", "seesaw_angle",
    "multi_ball_stack", "multi_ball_hinder", "multi_ball_redirect", "multi_ball_hole", "multi_ball_fill",
    "multi_ball_lever", "multi_ball_angle", "multi_ball_pendulum", "multi_ball_spring",
    "multi_ball_spring_flick",
];

/// Game ids in stable roster order, optionally restricted to one split.
pub fn list_games(split: Option<Split>) -> Vec<GameId> {
    ROSTER
        .iter()
        .filter(|(s, _)| split.is_none_or(|want| want == *s))
        .map(|(s, n)| GameId { split: *s, name: (*n).to_string() })
        .collect()
}

fn library() -> &'static [Result<Arc<Scene>, GameError>] {
    static LIBRARY: OnceLock<Vec<Result<Arc<Scene>, GameError>>> = OnceLock::new();
    LIBRARY.get_or_init(|| {
        SCENE_SOURCES
            .iter()
            .map(|(name, src)| Scene::from_json(src).and_then(|s| check_identity(s, name)).map(Arc::new))
            .collect()
    })
}

fn check_identity(scene: Scene, expected: &str) -> Result<Scene, GameError> {
    let want = GameId::parse(expected)?;
    if scene.game_id != want {
        return Err(GameError::SceneInvalid {
            game: expected.to_string(),
            reason: format!("file declares {:?}", scene.game_id),
        });
    }
    Ok(scene)
}

/// Loads a shipped scene. Scenes are parsed once and shared.
pub fn load_scene(name: &str) -> Result<Arc<Scene>, GameError> {
    let idx = SCENE_SOURCES
        .iter()
        .position(|(n, _)| *n == name)
        .ok_or_else(|| GameError::UnknownGame(name.to_string()))?;
    library()[idx].clone()
}

/// Every shipped scene of a split (or all), in roster order.
pub fn load_split(split: Option<Split>) -> Result<Vec<Arc<Scene>>, GameError> {
    list_games(split).iter().map(|g| load_scene(&g.name)).collect()
}
