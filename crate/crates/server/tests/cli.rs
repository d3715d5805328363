//! The `blockdrop` binary: output formats, determinism and exit codes.

use std::process::{Command, Output};
use std::sync::Arc;

use blockdrop::env::{run_sequence, write_jsonl, Digest};
use blockdrop::games::load_scene;

fn blockdrop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockdrop")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_line(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("not a JSON error line: {text}"))
}

#[test]
fn eval_is_deterministic_for_a_seed() {
    let args = ["eval", "--agent", "random", "--split", "basic", "--attempts", "2", "--seed", "7"];
    let a = blockdrop(&args);
    let b = blockdrop(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&b));
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report["games"].as_array().unwrap().len(), 10);
    assert_eq!(report["attempts_per_game"], 2);
}

#[test]
fn oracle_eval_table_reports_full_success() {
    let o = blockdrop(&["eval", "--agent", "oracle", "--split", "noisy", "--attempts", "1", "--table"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("100.0%"), "{}", stdout(&o));
}

#[test]
fn unknown_split_is_a_usage_error() {
    let o = blockdrop(&["eval", "--agent", "oracle", "--split", "hard"]);
    assert!(!o.status.success());
}

#[test]
fn validate_accepts_the_library() {
    let o = blockdrop(&["validate"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.ends_with("40/40 scenes valid\n"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("ok ")).count(), 40);
}

#[test]
fn validate_rejects_a_broken_scene_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    let scene = load_scene("support").unwrap();
    std::fs::write(&good, scene.to_json_pretty()).unwrap();
    std::fs::write(&bad, "{\"game_id\": \"support\"}").unwrap();
    let o = blockdrop(&["validate", good.to_str().unwrap(), bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("1/2 scenes valid"));
    assert_eq!(error_line(&o)["error"], "validation_failed");
}

#[test]
fn replay_prints_steps_and_flags_a_corrupted_digest() {
    let dir = tempfile::tempdir().unwrap();
    let scene = load_scene("hinder").unwrap();
    let mut record = run_sequence(Arc::clone(&scene), &scene.reference_solutions[0]).record();
    let good = dir.path().join("good.jsonl");
    write_jsonl(&good, [&record]).unwrap();

    let o = blockdrop(&["replay", good.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains(" step=")).count(), record.steps as usize);
    assert!(out.lines().last().unwrap().starts_with("ok hinder success=true"));

    record.digests[12] = Digest(record.digests[12].0 ^ 1);
    let bad = dir.path().join("bad.jsonl");
    write_jsonl(&bad, [&record]).unwrap();
    let o = blockdrop(&["replay", "--quiet", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e = error_line(&o);
    assert_eq!(e["error"], "digest_mismatch");
    assert_eq!(e["step"], 12);
    assert_eq!(e["record"], 0);
}

#[test]
fn replay_of_missing_file_is_an_io_error() {
    let o = blockdrop(&["replay", "/definitely/not/here.jsonl"]);
    assert!(!o.status.success());
    assert_eq!(error_line(&o)["error"], "io");
}

#[test]
fn sample_exports_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("samples.jsonl");
    let o = blockdrop(&["sample", "--game", "support", "--target", "3", "--export", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let profile: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(profile["entries"][0]["solutions_found"], 3);
    let rows = std::fs::read_to_string(&out).unwrap();
    assert!(rows.lines().count() >= 3);
}

#[test]
fn unknown_game_has_its_own_code() {
    let o = blockdrop(&["sample", "--game", "nope", "--target", "1"]);
    assert_eq!(error_line(&o)["error"], "unknown_game");
}

#[test]
fn export_copies_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("archive.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_blockdrop"))
        .args(["export", out.to_str().unwrap()])
        .env("BLOCKDROP_DATA_DIR", dir.path().join("data"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("exported 0 attempts"));
    // An empty archive replays to nothing.
    let o = blockdrop(&["replay", out.to_str().unwrap()]);
    assert!(o.status.success());
}
