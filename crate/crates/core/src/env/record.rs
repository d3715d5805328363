use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::{Env, StepOutcome};
use crate::games::load_scene;

pub const RECORD_VERSION: u32 = 1;

/// World digest after a step, serialized as 16 lowercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub u64);

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for Digest {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(Digest)
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An elimination request: action `slot` at control step `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordedAction {
    pub step: u32,
    pub slot: usize,
}

/// Everything needed to re-run an episode and check it step by step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub format_version: u32,
    pub game_id: String,
    pub seed: u64,
    pub actions: Vec<RecordedAction>,
    /// Per-step rewards.
    pub rewards: Vec<f64>,
    pub final_reward: f64,
    pub success: bool,
    pub eliminations: u32,
    pub steps: u32,
    /// World digest after each step.
    pub digests: Vec<Digest>,
}

impl EpisodeRecord {
    /// Final reward in exact tenths.
    pub fn final_reward_tenths(&self) -> i64 {
        (self.final_reward * 10.0).round() as i64
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Env(#[from] super::EnvError),
    #[error("record has no digests")]
    MissingDigests,
    #[error("digest mismatch at step {step}")]
    DigestMismatch { step: u32 },
    #[error("final reward mismatch: recorded {recorded}, replayed {replayed}")]
    RewardMismatch { recorded: f64, replayed: f64 },
}

/// Re-executes a record, checking the world digest after every step.
pub fn replay(record: &EpisodeRecord) -> Result<Vec<StepOutcome>, ReplayError> {
    if record.digests.is_empty() {
        return Err(ReplayError::MissingDigests);
    }
    let scene = load_scene(&record.game_id).map_err(super::EnvError::from)?;
    let mut env = Env::new(scene).with_seed(record.seed);
    let mut outcomes = Vec::with_capacity(record.digests.len());
    let mut step = 0u32;
    while !env.done() {
        let Some(expected) = record.digests.get(step as usize) else {
            // The replay keeps going where the record stopped.
            return Err(ReplayError::DigestMismatch { step });
        };
        for a in record.actions.iter().filter(|a| a.step == step) {
            env.eliminate_slot(a.slot)?;
        }
        let out = env.advance()?;
        if Digest(env.world().state_hash()) != *expected {
            return Err(ReplayError::DigestMismatch { step });
        }
        outcomes.push(out);
        step += 1;
    }
    if record.digests.len() > step as usize || record.actions.iter().any(|a| a.step >= step) {
        return Err(ReplayError::DigestMismatch { step });
    }
    if env.total_reward_tenths() != record.final_reward_tenths() {
        return Err(ReplayError::RewardMismatch { recorded: record.final_reward, replayed: env.total_reward() });
    }
    Ok(outcomes)
}

/// Writes records as JSON lines, one episode per line.
pub fn write_jsonl<'a>(path: &Path, records: impl IntoIterator<Item = &'a EpisodeRecord>) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn append_jsonl(path: &Path, record: &EpisodeRecord) -> io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    f.write_all(&line)
}

pub fn read_jsonl(path: &Path) -> io::Result<Vec<EpisodeRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
