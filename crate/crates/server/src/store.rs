//! Durable attempt log: one JSON line per finished attempt.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use blockdrop::env::EpisodeRecord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "BLOCKDROP_DATA_DIR";
const DEFAULT_DATA_DIR: &str = "blockdrop-data";
const ATTEMPTS_FILE: &str = "attempts.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {source}", path.display())]
    Parse { path: PathBuf, line: usize, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// One finished attempt by one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredAttempt {
    pub player: String,
    /// 1-based attempt number for this player and game.
    pub attempt: u32,
    pub record: EpisodeRecord,
}

/// Append-only attempt log. Appends are serialized through a lock, so many
/// sessions can share one store.
#[derive(Debug)]
pub struct RecordStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl RecordStore {
    /// Opens (creating if needed) the store rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>) -> Result<RecordStore, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(RecordStore { dir, lock: Mutex::new(()) })
    }

    /// Opens the directory named by `BLOCKDROP_DATA_DIR`, or `./blockdrop-data`.
    pub fn from_env() -> Result<RecordStore, StoreError> {
        let dir = std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_DATA_DIR), PathBuf::from);
        RecordStore::open(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self) -> PathBuf {
        self.dir.join(ATTEMPTS_FILE)
    }

    pub fn append(&self, attempt: &StoredAttempt) -> Result<(), StoreError> {
        let path = self.path();
        let mut line = serde_json::to_vec(attempt).expect("attempts serialize");
        line.push(b'\n');
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        f.write_all(&line).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    /// Every stored attempt, oldest first.
    pub fn all(&self) -> Result<Vec<StoredAttempt>, StoreError> {
        let path = self.path();
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        match File::open(&path) {
            Ok(f) => read_lines(&path, f),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    pub fn attempts(&self, player: &str, game: &str) -> Result<Vec<StoredAttempt>, StoreError> {
        Ok(self.all()?.into_iter().filter(|a| a.player == player && a.record.game_id == game).collect())
    }

    /// Highest reward per game for one player.
    pub fn best_scores(&self, player: &str) -> Result<BTreeMap<String, f64>, StoreError> {
        let mut best = BTreeMap::new();
        for a in self.all()?.into_iter().filter(|a| a.player == player) {
            let r = a.record.final_reward;
            best.entry(a.record.game_id).and_modify(|b: &mut f64| *b = b.max(r)).or_insert(r);
        }
        Ok(best)
    }

    /// Writes the full archive (every attempt with its replay record) to `path`.
    pub fn export(&self, path: &Path) -> Result<usize, StoreError> {
        let all = self.all()?;
        let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
        for a in &all {
            serde_json::to_writer(&mut out, a).map_err(|e| io_err(path)(e.into()))?;
            out.write_all(b"\n").map_err(io_err(path))?;
        }
        out.flush().map_err(io_err(path))?;
        Ok(all.len())
    }

    /// Appends every attempt of an exported archive to this store.
    pub fn import(&self, path: &Path) -> Result<Vec<StoredAttempt>, StoreError> {
        let attempts = read_archive(path)?;
        for a in &attempts {
            self.append(a)?;
        }
        Ok(attempts)
    }
}

/// Reads an exported archive.
pub fn read_archive(path: &Path) -> Result<Vec<StoredAttempt>, StoreError> {
    let f = File::open(path).map_err(io_err(path))?;
    read_lines(path, f)
}

fn read_lines(path: &Path, f: File) -> Result<Vec<StoredAttempt>, StoreError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let a = serde_json::from_str(&line).map_err(|source| StoreError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(a);
    }
    Ok(out)
}

/// Mean of per-game bests, the convention for summarizing a player.
pub fn mean_of_bests(best: &BTreeMap<String, f64>, games: &[String]) -> Option<f64> {
    let scores: Vec<f64> = games.iter().filter_map(|g| best.get(g).copied()).collect();
    if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }
}
