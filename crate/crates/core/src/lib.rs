//! Deterministic 2D physics puzzles where the only move is removing gray blocks:
//! the simulator, the 40-game library, an episode environment, agent harness
//! and analysis tools. The guide in `book/` walks through each part.

pub mod analytics;
pub mod env;
pub mod games;
pub mod harness;
pub mod physics;

// The guide's chapters run as doc-tests so their snippets cannot go stale.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
    #[doc = include_str!("../../../book/src/intro.md")]
    pub struct Intro;
    #[doc = include_str!("../../../book/src/physics.md")]
    pub struct Physics;
    #[doc = include_str!("../../../book/src/games.md")]
    pub struct Games;
    #[doc = include_str!("../../../book/src/environment.md")]
    pub struct Environment;
    #[doc = include_str!("../../../book/src/strategies.md")]
    pub struct Strategies;
    #[doc = include_str!("../../../book/src/analytics.md")]
    pub struct Analytics;
}
