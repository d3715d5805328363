//! `blockdrop` command line: play, eval, sample, replay, validate.
//!
//! Results go to stdout. Failures print a single JSON line
//! `{"error": <code>, "message": ..., ...}` to stderr and exit non-zero.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use blockdrop::analytics::{self, AnalyticsError, DIFFICULTY_BUDGET};
use blockdrop::env::{read_jsonl, replay, EpisodeRecord, ReplayError};
use blockdrop::games::{list_games, load_scene, load_split, verify_reference_solutions, GameError, Scene, Split};
use blockdrop::harness::{
    sample_solutions, write_samples_jsonl, Agent, HarnessError, NoOpAgent, OracleAgent, RandomAgent, Strategy,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::store::{read_archive, RecordStore, StoreError, DATA_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "blockdrop", version, about = "Physics block-elimination puzzles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the live session service and print where to connect.
    Play {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Milliseconds per control step.
        #[arg(long, default_value_t = 100)]
        tick_ms: u64,
        #[arg(long, env = DATA_DIR_ENV, default_value = "blockdrop-data")]
        data_dir: PathBuf,
    },
    /// Evaluate an agent under a strategy on a split; prints a JSON report.
    Eval {
        #[arg(long, value_enum)]
        agent: AgentKind,
        #[arg(long, default_value = "in-advance")]
        strategy: Strategy,
        /// basic, noisy, compositional or multi_ball.
        #[arg(long)]
        split: Split,
        #[arg(long, default_value_t = 5)]
        attempts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        table: bool,
    },
    /// Sampling difficulty profile; optionally export the sampled sequences.
    Sample {
        /// Restrict to one split (default: all games, or those given by --game).
        #[arg(long)]
        split: Option<Split>,
        #[arg(long = "game")]
        games: Vec<String>,
        #[arg(long, default_value_t = 50)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DIFFICULTY_BUDGET)]
        budget: u64,
        /// Write successful and failed sequences as JSON lines.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        table: bool,
    },
    /// Re-run recorded episodes and check every step's digest.
    Replay {
        file: PathBuf,
        /// Only print the summary line.
        #[arg(long)]
        quiet: bool,
    },
    /// Check scene files (default: the shipped library) and their solutions.
    Validate { files: Vec<PathBuf> },
    /// Copy the record store's archive to a file.
    Export {
        out: PathBuf,
        #[arg(long, env = DATA_DIR_ENV, default_value = "blockdrop-data")]
        data_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AgentKind {
    Random,
    Oracle,
    Noop,
}

impl AgentKind {
    pub fn build(self, seed: u64) -> Agent {
        match self {
            AgentKind::Random => Agent::Timing(Box::new(RandomAgent::new(seed))),
            AgentKind::Oracle => Agent::Timing(Box::new(OracleAgent::new())),
            AgentKind::Noop => Agent::Timing(Box::new(NoOpAgent)),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("record {index}: {source}")]
    Replay { index: usize, source: ReplayError },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{failed} of {total} scenes failed validation")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    /// Machine-readable code for the error line.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Game(GameError::UnknownGame(_)) => "unknown_game",
            CliError::Game(GameError::UnknownSplit(_)) => "unknown_split",
            CliError::Game(GameError::SceneInvalid { .. }) => "scene_invalid",
            CliError::Replay { source: ReplayError::DigestMismatch { .. }, .. } => "digest_mismatch",
            CliError::Replay { .. } => "replay_failed",
            CliError::Analytics(_) | CliError::Harness(_) => "harness",
            CliError::Store(_) => "storage",
            CliError::Io { .. } => "io",
            CliError::Validation { .. } => "validation_failed",
        }
    }

    pub fn error_line(&self) -> String {
        let mut v = json!({ "error": self.code(), "message": self.to_string() });
        if let CliError::Replay { index, source } = self {
            v["record"] = json!(index);
            if let ReplayError::DigestMismatch { step } = source {
                v["step"] = json!(step);
            }
        }
        v.to_string()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Runs one command, writing its normal output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout = |e| CliError::Io { path: PathBuf::from("<stdout>"), source: e };
    match cli.command {
        Command::Play { bind, tick_ms, data_dir } => play(bind, Duration::from_millis(tick_ms), &data_dir, out),
        Command::Eval { agent, strategy, split, attempts, seed, table } => {
            let mut a = agent.build(seed);
            let report = analytics::evaluate(&mut a, strategy, split, attempts, seed)?;
            if table {
                write!(out, "{}", report.to_table()).map_err(stdout)
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("reports serialize")).map_err(stdout)
            }
        }
        Command::Sample { split, games, target, seed, budget, export, table } => {
            let scenes: Vec<Arc<Scene>> = if games.is_empty() {
                load_split(split)?
            } else {
                games.iter().map(|g| load_scene(g)).collect::<Result<_, _>>()?
            };
            let profile = analytics::difficulty_profile_with_budget(&scenes, target, seed, budget)?;
            if let Some(path) = export {
                let mut rows = Vec::new();
                for scene in &scenes {
                    let r = match sample_solutions(scene, target, budget, seed) {
                        Ok(r) => r,
                        Err(HarnessError::BudgetExhausted(r)) => *r,
                        Err(e) => return Err(e.into()),
                    };
                    rows.extend(r.solutions);
                    rows.extend(r.failures);
                }
                write_samples_jsonl(&path, &rows).map_err(io_err(&path))?;
            }
            if table {
                write!(out, "{}", profile.to_table()).map_err(stdout)
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&profile).expect("profiles serialize")).map_err(stdout)
            }
        }
        Command::Replay { file, quiet } => {
            let records = read_records(&file)?;
            for (index, record) in records.iter().enumerate() {
                let steps = replay(record).map_err(|source| CliError::Replay { index, source })?;
                if !quiet {
                    for (k, (s, d)) in steps.iter().zip(&record.digests).enumerate() {
                        writeln!(
                            out,
                            "{} step={} t={:.1} reward={} total={} digest={}",
                            record.game_id,
                            k,
                            s.info.t,
                            s.reward,
                            record.rewards[..=k].iter().sum::<f64>(),
                            d
                        )
                        .map_err(stdout)?;
                    }
                }
                writeln!(
                    out,
                    "ok {} success={} reward={} steps={}",
                    record.game_id, record.success, record.final_reward, record.steps
                )
                .map_err(stdout)?;
            }
            Ok(())
        }
        Command::Validate { files } => validate(&files, out),
        Command::Export { out: path, data_dir } => {
            let n = RecordStore::open(data_dir)?.export(&path)?;
            writeln!(out, "exported {n} attempts to {}", path.display()).map_err(stdout)
        }
    }
}

/// Reads episode records from a JSON-lines file of records or of exported
/// attempts.
fn read_records(path: &Path) -> Result<Vec<EpisodeRecord>, CliError> {
    match read_jsonl(path) {
        Ok(records) => Ok(records),
        Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
            Ok(read_archive(path)?.into_iter().map(|a| a.record).collect())
        }
        Err(e) => Err(io_err(path)(e)),
    }
}

fn validate(files: &[PathBuf], out: &mut dyn Write) -> Result<(), CliError> {
    let scenes: Vec<Result<Arc<Scene>, (String, GameError)>> = if files.is_empty() {
        list_games(None).into_iter().map(|g| load_scene(&g.name).map_err(|e| (g.name.clone(), e))).collect()
    } else {
        let mut v = Vec::new();
        for f in files {
            let src = std::fs::read_to_string(f).map_err(io_err(f))?;
            v.push(Scene::from_json(&src).map(Arc::new).map_err(|e| (f.display().to_string(), e)));
        }
        v
    };
    let stdout = |e| CliError::Io { path: PathBuf::from("<stdout>"), source: e };
    let total = scenes.len();
    let mut failed = 0;
    for scene in scenes {
        match scene {
            Ok(scene) => {
                let report = verify_reference_solutions(&scene);
                if report.all_succeed() {
                    writeln!(
                        out,
                        "ok {} solutions={} best={:.1}",
                        scene.game_id,
                        report.solutions.len(),
                        report.best_reward()
                    )
                    .map_err(stdout)?;
                } else {
                    failed += 1;
                    writeln!(out, "FAIL {} reference solution does not succeed", scene.game_id).map_err(stdout)?;
                }
            }
            Err((name, e)) => {
                failed += 1;
                writeln!(out, "FAIL {name} {e}").map_err(stdout)?;
            }
        }
    }
    writeln!(out, "{}/{} scenes valid", total - failed, total).map_err(stdout)?;
    if failed > 0 {
        return Err(CliError::Validation { failed, total });
    }
    Ok(())
}

fn play(bind: SocketAddr, tick: Duration, data_dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let store = Arc::new(RecordStore::open(data_dir)?);
    let runtime = tokio::runtime::Runtime::new().map_err(io_err(Path::new("<runtime>")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind).await.map_err(io_err(Path::new("<bind>")))?;
        let addr = listener.local_addr().map_err(io_err(Path::new("<bind>")))?;
        let _ = writeln!(out, "blockdrop session service: http://{addr}/ (play socket ws://{addr}/ws)");
        let _ = out.flush();
        crate::server::serve(listener, store, tick).await.map_err(io_err(Path::new("<serve>")))
    })
}
