//! Per-connection play session: lobby, unlimited contemplation, a 15 s live
//! attempt advanced one control step per tick, and the five-attempt cap.

use std::sync::Arc;

use blockdrop::env::Env;
use blockdrop::games::{list_games, load_scene, Scene};
use serde::{Deserialize, Serialize};

use crate::protocol::{BodyPose, ClientMessage, ErrorCode, GameEntry, ServerMessage, PROTOCOL_VERSION};
use crate::store::{RecordStore, StoreError, StoredAttempt};

/// Attempts each player gets per game.
pub const MAX_ATTEMPTS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Connected; no game selected yet.
    Lobby,
    /// Game shown, clock stopped until the player starts.
    Contemplating,
    Running,
    /// An attempt just ended; the player may start another or pick a game.
    Finished,
}

pub struct Session {
    id: u64,
    store: Arc<RecordStore>,
    player: Option<String>,
    scene: Option<Arc<Scene>>,
    env: Option<Env>,
    attempt: u32,
    phase: Phase,
}

impl Session {
    pub fn new(id: u64, store: Arc<RecordStore>) -> Session {
        Session { id, store, player: None, scene: None, env: None, attempt: 0, phase: Phase::Lobby }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn env(&self) -> Option<&Env> {
        self.env.as_ref()
    }

    /// Parses and handles one text frame.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(ErrorCode::MalformedMessage, e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let result = match msg {
            ClientMessage::Hello { player } => self.hello(player),
            ClientMessage::SelectGame { game_id } => self.select(&game_id),
            ClientMessage::StartAttempt => self.start(),
            ClientMessage::Eliminate { body_id } => self.eliminate(body_id),
            ClientMessage::Abort => self.abort(),
        };
        result.unwrap_or_else(|e| vec![e])
    }

    /// Advances a running attempt by one control step.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        if self.phase != Phase::Running {
            return Vec::new();
        }
        let env = self.env.as_mut().expect("running sessions have an episode");
        env.advance().expect("running episode can advance");
        let mut out = vec![frame(env)];
        if env.done() {
            out.extend(self.finish());
        }
        out
    }

    fn player(&self) -> Result<&str, ServerMessage> {
        self.player.as_deref().ok_or_else(|| wrong_phase("say hello first"))
    }

    fn not_running(&self) -> Result<(), ServerMessage> {
        if self.phase == Phase::Running {
            Err(wrong_phase("an attempt is running"))
        } else {
            Ok(())
        }
    }

    fn used_attempts(&self, player: &str, game: &str) -> Result<u32, ServerMessage> {
        Ok(self.store.attempts(player, game).map_err(storage)?.len() as u32)
    }

    fn best(&self, player: &str, game: &str) -> Result<Option<f64>, ServerMessage> {
        Ok(self.store.best_scores(player).map_err(storage)?.get(game).copied())
    }

    fn hello(&mut self, player: String) -> Result<Vec<ServerMessage>, ServerMessage> {
        self.not_running()?;
        if player.trim().is_empty() {
            return Err(ServerMessage::error(ErrorCode::MalformedMessage, "player tag is empty"));
        }
        let best_scores = self.store.best_scores(&player).map_err(storage)?;
        let all = self.store.all().map_err(storage)?;
        let games = list_games(None)
            .into_iter()
            .map(|g| {
                let used = all.iter().filter(|a| a.player == player && a.record.game_id == g.name).count() as u32;
                GameEntry {
                    best: best_scores.get(&g.name).copied(),
                    attempts_left: MAX_ATTEMPTS.saturating_sub(used),
                    split: g.split.to_string(),
                    game_id: g.name,
                }
            })
            .collect();
        self.player = Some(player.clone());
        self.scene = None;
        self.phase = Phase::Lobby;
        Ok(vec![ServerMessage::Roster { protocol_version: PROTOCOL_VERSION, player, games, best_scores }])
    }

    fn select(&mut self, game: &str) -> Result<Vec<ServerMessage>, ServerMessage> {
        self.not_running()?;
        let player = self.player()?.to_string();
        let scene = load_scene(game).map_err(|e| ServerMessage::error(ErrorCode::UnknownGame, e.to_string()))?;
        let used = self.used_attempts(&player, game)?;
        let best = self.best(&player, game)?;
        let snapshot = ServerMessage::SceneSnapshot {
            game_id: game.to_string(),
            scene: public_scene(&scene),
            attempt: used + 1,
            attempts_left: MAX_ATTEMPTS.saturating_sub(used),
            best,
        };
        self.scene = Some(scene);
        self.env = None;
        self.phase = Phase::Contemplating;
        Ok(vec![snapshot])
    }

    fn start(&mut self) -> Result<Vec<ServerMessage>, ServerMessage> {
        self.not_running()?;
        let player = self.player()?.to_string();
        let scene = self.scene.clone().ok_or_else(|| wrong_phase("select a game first"))?;
        let used = self.used_attempts(&player, &scene.game_id.name)?;
        if used >= MAX_ATTEMPTS {
            return Err(ServerMessage::error(
                ErrorCode::AttemptsExhausted,
                format!("all {MAX_ATTEMPTS} attempts at {} are used", scene.game_id),
            ));
        }
        self.attempt = used + 1;
        let env = Env::new(scene).with_seed(self.id);
        let first = frame(&env);
        self.env = Some(env);
        self.phase = Phase::Running;
        Ok(vec![first])
    }

    /// Valid eliminations apply before the next tick's physics and show up in
    /// that tick's frame; invalid ones are answered right away.
    fn eliminate(&mut self, body: blockdrop::physics::BodyId) -> Result<Vec<ServerMessage>, ServerMessage> {
        if self.phase != Phase::Running {
            return Err(wrong_phase("no attempt is running"));
        }
        let env = self.env.as_mut().expect("running sessions have an episode");
        env.eliminate_body(body).map_err(|e| ServerMessage::error(ErrorCode::from(&e), e.to_string()))?;
        Ok(Vec::new())
    }

    /// Gives up the rest of the attempt: the clock runs out with no further
    /// actions, so the attempt counts and its record stays replayable.
    fn abort(&mut self) -> Result<Vec<ServerMessage>, ServerMessage> {
        if self.phase != Phase::Running {
            return Err(wrong_phase("no attempt is running"));
        }
        let env = self.env.as_mut().expect("running sessions have an episode");
        env.run_to_end().expect("running episode can finish");
        let last = frame(env);
        let mut out = vec![last];
        out.extend(self.finish());
        Ok(out)
    }

    fn finish(&mut self) -> Vec<ServerMessage> {
        self.phase = Phase::Finished;
        let env = self.env.as_ref().expect("finished attempts have an episode");
        let record = env.record();
        let player = self.player.clone().expect("attempts need a player");
        let game = record.game_id.clone();
        let (success, reward) = (record.success, record.final_reward);
        let mut out = Vec::new();
        if let Err(e) = self.store.append(&StoredAttempt { player: player.clone(), attempt: self.attempt, record }) {
            out.push(storage(e));
        }
        let best = self.best(&player, &game).unwrap_or(Some(reward));
        out.push(ServerMessage::AttemptResult {
            success,
            reward,
            attempts_left: MAX_ATTEMPTS.saturating_sub(self.attempt),
            best,
        });
        out
    }
}

fn wrong_phase(why: &str) -> ServerMessage {
    ServerMessage::error(ErrorCode::WrongPhase, why)
}

fn storage(e: StoreError) -> ServerMessage {
    ServerMessage::error(ErrorCode::Storage, e.to_string())
}

fn frame(env: &Env) -> ServerMessage {
    let world = env.world();
    let bodies = world
        .bodies()
        .iter()
        .enumerate()
        .filter(|(i, _)| !world.is_removed(*i))
        .map(|(_, b)| BodyPose { id: b.id, position: b.position, angle: b.angle })
        .collect();
    ServerMessage::Frame {
        step: env.current_step(),
        t: world.time(),
        bodies,
        eliminated: world.eliminated().iter().map(|e| e.body).collect(),
        reward_so_far: env.total_reward(),
    }
}

/// Scene geometry as sent to players: no reference solutions or hints.
fn public_scene(scene: &Scene) -> serde_json::Value {
    let mut value = serde_json::to_value(scene.to_file()).expect("scenes serialize");
    if let Some(obj) = value.as_object_mut() {
        for key in ["reference_solutions", "oracle_order", "timing_critical", "order_demo"] {
            obj.remove(key);
        }
    }
    value
}
