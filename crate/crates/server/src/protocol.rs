//! Wire messages. Every WebSocket text frame carries exactly one JSON object
//! tagged by `"type"`.

use std::collections::BTreeMap;

use blockdrop::physics::{BodyId, PhysicsError, Vec2};
use serde::{Deserialize, Serialize};

/// Bumped on any incompatible change to the messages below.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello { player: String },
    SelectGame { game_id: String },
    StartAttempt,
    Eliminate { body_id: BodyId },
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEntry {
    pub game_id: String,
    pub split: String,
    pub attempts_left: u32,
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    pub id: BodyId,
    pub position: Vec2,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Roster {
        protocol_version: u32,
        player: String,
        games: Vec<GameEntry>,
        best_scores: BTreeMap<String, f64>,
    },
    /// Full geometry of the selected game at t = 0, in the scene file layout
    /// minus the solution fields.
    SceneSnapshot {
        game_id: String,
        scene: serde_json::Value,
        attempt: u32,
        attempts_left: u32,
        best: Option<f64>,
    },
    /// State after control step `step` (time `t`). Lists every elimination of
    /// the attempt so far, so a lost frame never hides one.
    Frame {
        step: u32,
        t: f64,
        bodies: Vec<BodyPose>,
        eliminated: Vec<BodyId>,
        reward_so_far: f64,
    },
    AttemptResult {
        success: bool,
        reward: f64,
        attempts_left: u32,
        best: Option<f64>,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> ServerMessage {
        ServerMessage::Error { code, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    MalformedMessage,
    /// The message is not valid in the session's current phase.
    WrongPhase,
    UnknownGame,
    AttemptsExhausted,
    NotEliminable,
    AlreadyEliminated,
    UnknownBody,
    Storage,
}

impl From<&PhysicsError> for ErrorCode {
    fn from(e: &PhysicsError) -> Self {
        match e {
            PhysicsError::NotEliminable(_) => ErrorCode::NotEliminable,
            PhysicsError::AlreadyEliminated(_) => ErrorCode::AlreadyEliminated,
            PhysicsError::UnknownBody(_) => ErrorCode::UnknownBody,
            _ => ErrorCode::WrongPhase,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_messages_are_tagged() {
        let m: ClientMessage = serde_json::from_str(r#"{"type":"eliminate","body_id":3}"#).unwrap();
        assert_eq!(m, ClientMessage::Eliminate { body_id: BodyId(3) });
        let s = serde_json::to_string(&ClientMessage::StartAttempt).unwrap();
        assert_eq!(s, r#"{"type":"start_attempt"}"#);
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"jump"}"#).is_err());
    }

    #[test]
    fn error_codes_serialize_by_name() {
        let s = serde_json::to_string(&ServerMessage::error(ErrorCode::AttemptsExhausted, "five")).unwrap();
        assert!(s.contains(r#""code":"AttemptsExhausted""#), "{s}");
        assert!(s.contains(r#""type":"error""#));
    }
}
