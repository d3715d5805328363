//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every line is printed whether or not an earlier
//! criterion failed; exits non-zero if any did.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use blockdrop::analytics::{
    attempt_seed, attribute_failures, difficulty_profile, evaluate, GameOutcome, SplitReport,
};
use blockdrop::env::{replay, run_sequence, Env, EpisodeRecord, FEATURES};
use blockdrop::games::{load_split, verify_reference_solutions, Scene, Split, MAX_ACTIONS};
use blockdrop::harness::{
    run_combined_on, run_in_advance_on, Agent, FixedPlan, OracleAgent, RandomAgent, Strategy, TimingAgent,
};
use blockdrop::physics::{BodyId, Shape, Status, MAX_BODIES};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SPLITS: [Split; 4] = [Split::Basic, Split::Noisy, Split::Compositional, Split::MultiBall];

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("determinism/replay", determinism_replay),
        ("reward identity", reward_identity),
        ("solvability/oracle", solvability_oracle),
        ("timing sensitivity", timing_sensitivity),
        ("order sensitivity", order_sensitivity),
        ("failure attribution", failure_attribution),
        ("difficulty ordering", difficulty_ordering),
        ("random-vs-oracle ordering", random_vs_oracle),
        ("observation contract", observation_contract),
        ("strategy equivalence", strategy_equivalence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn all_scenes() -> Vec<Arc<Scene>> {
    load_split(None).expect("library loads")
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

/// The reward written out by hand, in tenths of a point.
fn expected_tenths(success: bool, eliminations: u32, steps: u32) -> i64 {
    10_000 * i64::from(success) - 100 * i64::from(eliminations) - i64::from(steps)
}

fn random_episodes(n: usize) -> Vec<EpisodeRecord> {
    let scenes = all_scenes();
    (0..n)
        .map(|i| {
            let mut agent = RandomAgent::new(attempt_seed(0, i, 0));
            run_in_advance_on(&mut agent, scenes[i % scenes.len()].clone()).unwrap().record
        })
        .collect()
}

fn determinism_replay() -> Check {
    let start = Instant::now();
    let first = random_episodes(100);
    let second = random_episodes(100);
    let mut mismatches = 0;
    for (a, b) in first.iter().zip(&second) {
        if a.digests != b.digests || a != b {
            mismatches += 1;
        }
        if replay(a).is_err() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(mismatches == 0, || format!("{mismatches} mismatching episodes"))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {:.1}s", elapsed.as_secs_f64()))?;
    let steps: u32 = first.iter().map(|r| r.steps).sum();
    Ok(format!("100 episodes, {steps} step digests, 0 mismatches"))
}

fn reward_identity() -> Check {
    let mut records = random_episodes(100);
    for scene in all_scenes() {
        for seq in &scene.reference_solutions {
            records.push(run_sequence(scene.clone(), seq).record());
        }
        records.push(run_sequence(scene.clone(), &Default::default()).record());
    }
    for r in &records {
        let want = expected_tenths(r.success, r.eliminations, r.steps);
        ensure(r.final_reward_tenths() == want, || {
            format!("{}: {} != {want} tenths", r.game_id, r.final_reward_tenths())
        })?;
        let summed: i64 = r.rewards.iter().map(|x| (x * 10.0).round() as i64).sum();
        ensure(summed == want, || format!("{}: per-step sum {summed} != {want}", r.game_id))?;
        ensure(r.eliminations as usize == r.actions.len(), || format!("{}: elimination count", r.game_id))?;
    }
    Ok(format!("{} episodes exact", records.len()))
}

fn oracle_report(split: Split) -> SplitReport {
    let mut agent = Agent::Timing(Box::new(OracleAgent::new()));
    evaluate(&mut agent, Strategy::InAdvance, split, 1, 0).unwrap()
}

fn solvability_oracle() -> Check {
    let scenes = all_scenes();
    ensure(scenes.len() == 40, || format!("{} scenes", scenes.len()))?;
    for scene in &scenes {
        let report = verify_reference_solutions(scene);
        ensure(report.all_succeed(), || format!("{} reference fails", scene.game_id))?;
    }
    let mut parts = Vec::new();
    for split in SPLITS {
        let r = oracle_report(split);
        ensure((940.0..=1000.0).contains(&r.mean_reward), || format!("{split} mean {:.2}", r.mean_reward))?;
        ensure(r.success_rate == 100.0, || format!("{split} SR {}%", r.success_rate))?;
        parts.push(format!("{split} {:.2}", r.mean_reward));
    }
    Ok(format!("40/40 references succeed; oracle means {}; SR 100%", parts.join(", ")))
}

fn timing_sensitivity() -> Check {
    let mut flipped = Vec::new();
    for scene in all_scenes() {
        let Some(probe) = scene.timing_critical else { continue };
        let seq = &scene.reference_solutions[probe.solution];
        ensure(run_sequence(scene.clone(), seq).status() == Status::Success, || {
            format!("{} unshifted fails", scene.game_id)
        })?;
        // ±0.5 s is ±5 control steps.
        for delta in [-5, 5] {
            let moved = seq.shifted(probe.entry, delta).ok_or_else(|| format!("{} cannot shift", scene.game_id))?;
            ensure(run_sequence(scene.clone(), &moved).status() != Status::Success, || {
                format!("{} still succeeds at {delta:+} steps", scene.game_id)
            })?;
        }
        flipped.push(scene.game_id.name.clone());
    }
    ensure(flipped.len() >= 3, || format!("only {} designated games", flipped.len()))?;
    ensure(flipped.iter().any(|g| g.contains("impulse")), || "no impulse-family game".into())?;
    Ok(format!("{} games flip: {}", flipped.len(), flipped.join(", ")))
}

fn order_sensitivity() -> Check {
    let basic = load_split(Some(Split::Basic)).unwrap();
    let scene = basic.iter().find(|s| s.order_demo.is_some()).ok_or("no basic game documents an order demo")?;
    let demo = scene.order_demo.clone().unwrap();
    let wrong = run_sequence(scene.clone(), &demo.wrong);
    let right = run_sequence(scene.clone(), &demo.right);
    ensure(wrong.status() != Status::Success, || "wrong order succeeds".into())?;
    ensure(right.status() == Status::Success, || "right order fails".into())?;
    ensure(demo.right.entries.len() == 2, || format!("right sequence has {} steps", demo.right.entries.len()))?;
    ensure(demo.wrong.order() != demo.right.order(), || "demo orders are identical".into())?;
    Ok(format!("{}: wrong order fails, 2-step order succeeds ({:.1})", scene.game_id, right.total_reward()))
}

/// Game, oracle order, solved, played order.
type Row = (&'static str, &'static [u32], bool, &'static [u32]);

fn failure_attribution() -> Check {
    let ids = |v: &[u32]| v.iter().map(|&i| BodyId(i)).collect::<Vec<_>>();
    // 4 solved in oracle order, 3 failed in oracle order, 3 failed in
    // another order.
    let rows: [Row; 10] = [
        ("a", &[1], true, &[1]),
        ("b", &[1, 2], true, &[1, 2]),
        ("c", &[2, 1], true, &[2, 1]),
        ("d", &[3], true, &[3]),
        ("e", &[1, 2, 3], false, &[1, 2, 3]),
        ("f", &[2], false, &[2]),
        ("g", &[4, 1], false, &[4, 1]),
        ("h", &[1], false, &[]),
        ("i", &[2, 3], false, &[3, 2]),
        ("j", &[5], false, &[4]),
    ];
    let oracle: HashMap<String, Vec<BodyId>> = rows.iter().map(|r| (r.0.to_string(), ids(r.1))).collect();
    let results: Vec<GameOutcome> =
        rows.iter().map(|r| GameOutcome { game: r.0.into(), solved: r.2, order: ids(r.3) }).collect();
    // Count by hand.
    let (mut sn, mut ron, mut sron) = (0, 0, 0);
    for r in &rows {
        let right = r.1 == r.3;
        sn += u32::from(r.2);
        ron += u32::from(right);
        sron += u32::from(right && r.2);
    }
    let a = attribute_failures(&results, &oracle).map_err(|e| e.to_string())?;
    ensure((a.total, a.sn, a.ron, a.sron) == (10, sn, ron, sron), || format!("counts {a:?}"))?;
    ensure((a.total, a.sn, a.ron, a.sron) == (10, 4, 7, 4), || format!("fixture counts {a:?}"))?;
    ensure(a.p_timing == 0.5 && a.p_order == 0.5, || format!("{} / {}", a.p_timing, a.p_order))?;
    ensure(a.p_timing + a.p_order == 1.0, || "shares do not sum to one".into())?;
    Ok("Total=10 SN=4 RON=7 SRON=4 -> 0.5/0.5".into())
}

fn difficulty_ordering() -> Check {
    let start = Instant::now();
    let basic = load_split(Some(Split::Basic)).unwrap();
    let profile = difficulty_profile(&basic, 50, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let seesaw = profile.iterations("seesaw").ok_or("no seesaw entry")?;
    let support = profile.iterations("support").ok_or("no support entry")?;
    let median = profile.median();
    let detail = format!("seesaw {seesaw}, support {support}, basic median {median}");
    ensure(seesaw > support, || detail.clone())?;
    ensure(seesaw as f64 > median, || detail.clone())?;
    ensure(elapsed <= Duration::from_secs(600), || format!("took {:.0}s", elapsed.as_secs_f64()))?;
    Ok(detail)
}

fn random_vs_oracle() -> Check {
    let mut random = Agent::Timing(Box::new(RandomAgent::new(0)));
    let r = evaluate(&mut random, Strategy::InAdvance, Split::Basic, 5, 0).map_err(|e| e.to_string())?;
    let oracle = oracle_report(Split::Basic);
    ensure(r.success_rate > 0.0 && r.success_rate < 100.0, || format!("random SR {}%", r.success_rate))?;
    ensure(oracle.success_rate > r.success_rate, || "oracle does not beat random".into())?;
    Ok(format!("random SR {:.1}% (mean {:.2}) < oracle SR {:.0}%", r.success_rate, r.mean_reward, oracle.success_rate))
}

fn check_observation(env: &Env) -> Result<(), String> {
    let obs = env.observation();
    let world = env.world();
    let flat = obs.flatten();
    ensure(flat.len() == MAX_BODIES * FEATURES && flat.len() == 108, || "not 12x9".into())?;
    for (i, row) in obs.rows.iter().enumerate() {
        let live = i < world.bodies().len() && !world.is_removed(i);
        if !live {
            ensure(row.iter().all(|&v| v == 0.0), || format!("row {i} should be zero"))?;
            continue;
        }
        ensure(row[5..].iter().all(|&v| v == 0.0 || v == 1.0), || format!("row {i} indicators {row:?}"))?;
        if matches!(world.bodies()[i].shape, Shape::Ball { .. }) {
            ensure(row[0] == row[2] && row[1] == row[3], || format!("ball row {i} {row:?}"))?;
        }
    }
    Ok(())
}

fn observation_contract() -> Check {
    let mut observations = 0;
    for scene in all_scenes() {
        // An idle pass covers the full 150-step horizon; the reference pass
        // covers eliminated rows.
        for plan in [Default::default(), scene.reference_solutions[0].clone()] {
            let mut env = Env::new(scene.clone());
            while !env.done() {
                check_observation(&env).map_err(|e| format!("{} step {}: {e}", scene.game_id, env.current_step()))?;
                observations += 1;
                let step = env.current_step();
                for a in plan.entries.iter().filter(|a| a.step == step) {
                    env.eliminate_body(a.body).map_err(|e| e.to_string())?;
                }
                env.advance().map_err(|e| e.to_string())?;
            }
            check_observation(&env).map_err(|e| format!("{} final: {e}", scene.game_id))?;
            if plan.entries.is_empty() {
                ensure(env.current_step() == 150, || format!("{} idle run ended at {}", scene.game_id, env.current_step()))?;
            }
        }
    }
    Ok(format!("{observations} observations over 40 games"))
}

fn strategy_equivalence() -> Check {
    let scenes = all_scenes();
    let mut vectors = RandomAgent::new(2024);
    let mut compared = 0;
    for scene in scenes.iter().step_by(4).take(10) {
        for _ in 0..20 {
            let v = vectors.draw().values().to_vec();
            let mut fixed = FixedPlan(v.clone());
            let a = run_in_advance_on(&mut fixed, scene.clone()).unwrap().record;
            let b = run_combined_on(&mut fixed as &mut dyn TimingAgent, scene.clone()).unwrap().record;
            ensure(a.digests == b.digests && a.actions == b.actions, || {
                format!("{} diverges for {v:?}", scene.game_id)
            })?;
            compared += 1;
        }
    }
    ensure(compared == 200 && MAX_ACTIONS == 6, || format!("{compared} comparisons"))?;
    Ok("200 timelines digest-identical (20 vectors x 10 games)".into())
}
