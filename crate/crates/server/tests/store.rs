use std::collections::BTreeMap;
use std::sync::Arc;

use blockdrop::env::{replay, run_sequence, EpisodeRecord};
use blockdrop::games::{load_scene, TimedActionSequence};
use blockdrop_server::store::{mean_of_bests, read_archive, RecordStore, StoredAttempt};

fn real_record(game: &str, solve: bool) -> EpisodeRecord {
    let scene = load_scene(game).unwrap();
    let seq = if solve { scene.reference_solutions[0].clone() } else { TimedActionSequence::default() };
    run_sequence(Arc::clone(&scene), &seq).record()
}

fn with_reward(game: &str, reward: f64) -> EpisodeRecord {
    let mut r = real_record(game, true);
    r.final_reward = reward;
    r
}

#[test]
fn best_score_is_the_maximum_over_attempts() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::open(dir.path()).unwrap();
    for (i, reward) in [940.0, 962.5, -15.0].into_iter().enumerate() {
        let record = with_reward("support", reward);
        store.append(&StoredAttempt { player: "p".into(), attempt: i as u32 + 1, record }).unwrap();
    }
    store.append(&StoredAttempt { player: "q".into(), attempt: 1, record: with_reward("support", 990.0) }).unwrap();
    let best = store.best_scores("p").unwrap();
    assert_eq!(best.get("support"), Some(&962.5));
    assert_eq!(store.attempts("p", "support").unwrap().len(), 3);
    assert_eq!(store.attempts("p", "hinder").unwrap().len(), 0);

    // Reopening reads the same log.
    let reopened = RecordStore::open(dir.path()).unwrap();
    assert_eq!(reopened.best_scores("p").unwrap(), best);
    assert_eq!(reopened.best_scores("q").unwrap().get("support"), Some(&990.0));
}

#[test]
fn mean_of_bests_skips_unplayed_games() {
    let best: BTreeMap<String, f64> = [("a".to_string(), 940.0), ("b".to_string(), -15.0)].into();
    let games: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    assert_eq!(mean_of_bests(&best, &games), Some(462.5));
    assert_eq!(mean_of_bests(&best, &["c".to_string()]), None);
}

#[test]
fn export_import_round_trip_replays_clean() {
    let src = tempfile::tempdir().unwrap();
    let store = RecordStore::open(src.path()).unwrap();
    let games = ["support", "hinder", "direction", "seesaw_angle"];
    for (i, g) in games.iter().enumerate() {
        for (k, solve) in [true, false].into_iter().enumerate() {
            let record = real_record(g, solve);
            store.append(&StoredAttempt { player: format!("p{i}"), attempt: k as u32 + 1, record }).unwrap();
        }
    }
    let archive = src.path().join("export.jsonl");
    assert_eq!(store.export(&archive).unwrap(), 8);

    let dst = tempfile::tempdir().unwrap();
    let other = RecordStore::open(dst.path()).unwrap();
    let imported = other.import(&archive).unwrap();
    assert_eq!(imported, store.all().unwrap());
    assert_eq!(other.all().unwrap(), imported);
    for a in read_archive(&archive).unwrap() {
        let steps = replay(&a.record).unwrap();
        assert_eq!(steps.len() as u32, a.record.steps);
    }
}

#[test]
fn corrupt_log_line_is_reported_with_its_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::open(dir.path()).unwrap();
    store.append(&StoredAttempt { player: "p".into(), attempt: 1, record: real_record("support", true) }).unwrap();
    let path = dir.path().join("attempts.jsonl");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"player\": \n");
    std::fs::write(&path, text).unwrap();
    let err = store.all().unwrap_err().to_string();
    assert!(err.contains(":2:"), "{err}");
}

#[test]
fn concurrent_appends_do_not_interleave() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(RecordStore::open(dir.path()).unwrap());
    let record = real_record("support", true);
    std::thread::scope(|s| {
        for t in 0..4 {
            let store = &store;
            let record = record.clone();
            s.spawn(move || {
                for k in 0..10 {
                    let a = StoredAttempt { player: format!("t{t}"), attempt: k + 1, record: record.clone() };
                    store.append(&a).unwrap();
                }
            });
        }
    });
    let all = store.all().unwrap();
    assert_eq!(all.len(), 40);
    assert!(all.iter().all(|a| a.record == record));
}
