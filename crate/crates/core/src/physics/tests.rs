use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;

fn goal() -> GoalRegion {
    GoalRegion { min: Vec2::new(280.0, 560.0), max: Vec2::new(320.0, 600.0) }
}

fn world(bodies: Vec<Body>) -> World {
    World::new(PhysicsParams::default(), bodies, vec![], vec![], goal()).unwrap()
}

fn ball(id: u32, x: f64, y: f64) -> Body {
    Body::ball(BodyId(id), Role::RedBall, Vec2::new(x, y), 10.0)
}

fn bar(id: u32, role: Role, a: (f64, f64), b: (f64, f64), t: f64) -> Body {
    Body::bar(BodyId(id), role, Vec2::new(a.0, a.1), Vec2::new(b.0, b.1), t)
}

#[test]
fn free_fall_matches_semi_implicit_euler() {
    let mut w = world(vec![ball(0, 300.0, 100.0)]);
    w.step(0.1).unwrap();
    let g = 900.0;
    let dt: f64 = 0.01;
    let expected: f64 = (1..=10).map(|i| g * dt * dt * f64::from(i)).sum();
    let b = &w.bodies()[0];
    assert!((expected - 4.95).abs() < 1e-12);
    assert!((b.position.y - 100.0 - expected).abs() < 1e-9, "{}", b.position.y);
    assert!((b.velocity.y - 90.0).abs() < 1e-9);
    assert_eq!(b.position.x, 300.0);
    assert!((w.time() - 0.1).abs() < 1e-12);
}

#[test]
fn static_bodies_never_move() {
    let mut w = world(vec![
        bar(0, Role::Gray, (100.0, 300.0), (200.0, 300.0), 10.0),
        bar(1, Role::Black, (0.0, 500.0), (600.0, 500.0), 10.0),
        ball(2, 150.0, 280.0),
    ]);
    let before: Vec<Body> = w.bodies()[..2].to_vec();
    for _ in 0..30 {
        w.step(0.1).unwrap();
    }
    assert_eq!(&w.bodies()[..2], &before[..]);
    for b in &w.bodies()[..2] {
        assert_eq!(b.velocity, Vec2::ZERO);
        assert_eq!(b.angular_velocity, 0.0);
    }
}

#[test]
fn ball_settles_on_a_bar() {
    let mut w = world(vec![bar(0, Role::Gray, (100.0, 300.0), (200.0, 300.0), 10.0), ball(1, 150.0, 200.0)]);
    for _ in 0..30 {
        w.step(0.1).unwrap();
    }
    let b = &w.bodies()[1];
    assert!((b.position.y - 285.0).abs() < 1.0, "resting height {}", b.position.y);
    assert!(b.velocity.length() < 1.0);
}

#[test]
fn eliminating_support_releases_ball() {
    let mut w = world(vec![bar(0, Role::Gray, (100.0, 300.0), (200.0, 300.0), 10.0), ball(1, 150.0, 285.0)]);
    for _ in 0..5 {
        w.step(0.1).unwrap();
    }
    let y0 = w.bodies()[1].position.y;
    w.eliminate(BodyId(0)).unwrap();
    w.step(0.1).unwrap();
    let b = &w.bodies()[1];
    assert!(b.velocity.y > 80.0 && b.position.y > y0 + 4.0);
    assert_eq!(w.eliminated(), &[Elimination { body: BodyId(0), time: 0.5 }]);
}

#[test]
fn elimination_errors_are_distinct() {
    let mut w = world(vec![
        bar(0, Role::Gray, (100.0, 300.0), (200.0, 300.0), 10.0),
        bar(1, Role::Blue, (100.0, 200.0), (200.0, 200.0), 10.0),
        bar(2, Role::Black, (0.0, 500.0), (600.0, 500.0), 10.0),
        ball(3, 400.0, 100.0),
    ]);
    assert_eq!(w.eliminate(BodyId(1)), Err(PhysicsError::NotEliminable(BodyId(1))));
    assert_eq!(w.eliminate(BodyId(2)), Err(PhysicsError::NotEliminable(BodyId(2))));
    assert_eq!(w.eliminate(BodyId(3)), Err(PhysicsError::NotEliminable(BodyId(3))));
    assert_eq!(w.eliminate(BodyId(9)), Err(PhysicsError::UnknownBody(BodyId(9))));
    w.eliminate(BodyId(0)).unwrap();
    let snapshot = w.clone();
    assert_eq!(w.eliminate(BodyId(0)), Err(PhysicsError::AlreadyEliminated(BodyId(0))));
    assert_eq!(w, snapshot);
}

#[test]
fn finished_world_rejects_steps_and_eliminations() {
    let mut w = world(vec![bar(0, Role::Gray, (0.0, 300.0), (100.0, 300.0), 10.0), ball(1, 300.0, 100.0)]);
    while w.status() == Status::Running {
        w.step(0.1).unwrap();
    }
    // The ball falls straight into the goal column.
    assert_eq!(w.status(), Status::Success);
    assert!(matches!(w.step(0.1), Err(PhysicsError::NotRunning(Status::Success))));
    assert_eq!(w.eliminate(BodyId(0)), Err(PhysicsError::EpisodeOver));
}

#[test]
fn timeout_after_fifteen_seconds() {
    let mut w = world(vec![bar(0, Role::Black, (0.0, 300.0), (600.0, 300.0), 10.0), ball(1, 100.0, 285.0)]);
    let mut n = 0;
    while w.status() == Status::Running {
        w.step(0.1).unwrap();
        n += 1;
    }
    assert_eq!(n, 150);
    assert_eq!(w.status(), Status::Timeout);
    assert!((w.time() - 15.0).abs() < 1e-9);
}

#[test]
fn wrong_control_step_is_rejected() {
    let mut w = world(vec![ball(0, 100.0, 100.0)]);
    assert!(matches!(w.step(0.05), Err(PhysicsError::ControlStep { .. })));
}

#[test]
fn goal_requires_every_ball() {
    let mut w = world(vec![ball(0, 300.0, 500.0), ball(1, 100.0, 100.0), bar(2, Role::Black, (0.0, 120.0), (200.0, 120.0), 10.0)]);
    for _ in 0..10 {
        w.step(0.1).unwrap();
    }
    assert!(!w.goal_reached());
    assert_eq!(w.status(), Status::Running);
}

#[test]
fn hash_tracks_state() {
    let mut w = world(vec![ball(0, 300.0, 100.0)]);
    let copy = w.clone();
    assert_eq!(w.state_hash(), copy.state_hash());
    w.step(0.1).unwrap();
    assert_ne!(w.state_hash(), copy.state_hash());
}

#[test]
fn control_step_equals_ten_substeps() {
    let make = || {
        world(vec![
            bar(0, Role::Gray, (100.0, 300.0), (250.0, 340.0), 10.0),
            ball(1, 150.0, 200.0),
            bar(2, Role::Blue, (180.0, 250.0), (240.0, 250.0), 10.0),
        ])
    };
    let mut a = make();
    let mut b = make();
    for _ in 0..20 {
        a.step(0.1).unwrap();
        for _ in 0..10 {
            b.substep();
        }
        assert_eq!(a.state_hash(), b.state_hash());
    }
}

/// A bar pinned to the world at its top with a ball pinned at its tip.
fn pendulum(length: f64, amplitude: f64) -> World {
    let pivot = Vec2::new(300.0, 100.0);
    let tip = pivot + Vec2::new(length * amplitude.sin(), length * amplitude.cos());
    let bodies = vec![
        Body::bar(BodyId(0), Role::Blue, pivot, tip, 6.0),
        Body::ball(BodyId(1), Role::RedBall, tip, 20.0),
    ];
    let joints = vec![
        Joint { body: BodyId(0), other: Anchor::World, pivot, kind: JointKind::Pin },
        Joint { body: BodyId(1), other: Anchor::Body(BodyId(0)), pivot: tip, kind: JointKind::Pin },
    ];
    let mut params = PhysicsParams::default();
    params.episode_seconds = 30.0;
    World::new(params, bodies, joints, vec![], goal()).unwrap()
}

fn swing_angle(w: &World) -> f64 {
    let (a, b) = w.bodies()[0].endpoints();
    let d = b - a;
    d.x.atan2(d.y)
}

/// Period from the first two downward zero crossings of the swing angle.
fn crossing_period(mut sample: impl FnMut() -> Option<(f64, f64)>) -> f64 {
    let mut crossings = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    while crossings.len() < 2 {
        let (t, th) = sample().expect("pendulum never crossed");
        if let Some((t0, th0)) = prev {
            if th0 > 0.0 && th <= 0.0 || th0 < 0.0 && th >= 0.0 {
                crossings.push(t0 + (t - t0) * th0 / (th0 - th));
            }
        }
        prev = Some((t, th));
    }
    2.0 * (crossings[1] - crossings[0])
}

/// Reference: RK4 on the compound-pendulum ODE of the same mass model, dt = 1e-4 s.
fn reference_period(w: &World, length: f64, amplitude: f64) -> f64 {
    let rod = &w.bodies()[0];
    let tip = &w.bodies()[1];
    let (mr, mb) = (rod.mass(), tip.mass());
    let inertia = mr * (rod.shape.unit_inertia() + (length / 2.0).powi(2)) + mb * length * length;
    let torque = 900.0 * (mr * length / 2.0 + mb * length);
    let k = torque / inertia;
    let f = |th: f64, om: f64| (om, -k * th.sin());
    let (mut th, mut om, mut t) = (amplitude, 0.0, 0.0);
    let h = 1e-4;
    crossing_period(move || {
        let (k1t, k1o) = f(th, om);
        let (k2t, k2o) = f(th + 0.5 * h * k1t, om + 0.5 * h * k1o);
        let (k3t, k3o) = f(th + 0.5 * h * k2t, om + 0.5 * h * k2o);
        let (k4t, k4o) = f(th + h * k3t, om + h * k3o);
        th += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        om += h / 6.0 * (k1o + 2.0 * k2o + 2.0 * k3o + k4o);
        t += h;
        Some((t, th))
    })
}

#[test]
fn pendulum_period_matches_reference_integration() {
    let (length, amplitude) = (200.0, 30f64.to_radians());
    let mut w = pendulum(length, amplitude);
    let reference = reference_period(&w, length, amplitude);
    let simple = 2.0 * PI * (length / 900.0).sqrt();
    assert!((reference - simple).abs() / simple < 0.15, "reference {reference} vs simple {simple}");

    let dt = w.params().substep_dt();
    let mut t = 0.0;
    let simulated = crossing_period(|| {
        w.substep();
        t += dt;
        (t < 10.0).then(|| (t, swing_angle(&w)))
    });
    assert!((simulated - reference).abs() / reference < 0.15, "simulated {simulated} vs reference {reference}");
    assert!((simulated - simple).abs() / simple < 0.15);
}

#[test]
fn pin_holds_pivot() {
    let mut w = pendulum(200.0, 50f64.to_radians());
    let pivot = Vec2::new(300.0, 100.0);
    for _ in 0..150 {
        w.step(0.1).unwrap();
        let (top, _) = w.bodies()[0].endpoints();
        assert!(top.distance(pivot) < 0.5, "drift {}", top.distance(pivot));
        let (_, tip) = w.bodies()[0].endpoints();
        assert!(tip.distance(w.bodies()[1].position) < 0.5);
    }
}

#[test]
fn spring_oscillates_around_rest_length() {
    let anchor = Vec2::new(300.0, 100.0);
    let bodies = vec![Body::ball(BodyId(0), Role::Blue, Vec2::new(300.0, 250.0), 10.0)];
    let springs = vec![Spring { body_a: BodyId(0), end_b: SpringEnd::Point(anchor), rest_length: 100.0, stiffness: 3000.0, damping: 600.0 }];
    let mut w = World::new(PhysicsParams::default(), bodies, vec![], springs, goal()).unwrap();
    assert!(w.is_springed(0));
    for _ in 0..150 {
        w.step(0.1).unwrap();
    }
    // Equilibrium: k (L - rest) = m g.
    let m = w.bodies()[0].mass();
    let expected = 100.0 + m * 900.0 / 3000.0;
    let got = w.bodies()[0].position.distance(anchor);
    assert!((got - expected).abs() < 1.0, "{got} vs {expected}");
}

#[test]
fn invalid_worlds_are_rejected() {
    let too_many: Vec<Body> = (0..13).map(|i| ball(i, 10.0 * f64::from(i), 0.0)).collect();
    assert!(World::new(PhysicsParams::default(), too_many, vec![], vec![], goal()).is_err());
    let red_bar = vec![bar(0, Role::RedBall, (0.0, 0.0), (10.0, 0.0), 4.0)];
    assert!(World::new(PhysicsParams::default(), red_bar, vec![], vec![], goal()).is_err());
    let off_pivot = vec![bar(0, Role::Blue, (0.0, 0.0), (100.0, 0.0), 4.0)];
    let j = vec![Joint { body: BodyId(0), other: Anchor::World, pivot: Vec2::new(50.0, 40.0), kind: JointKind::Pin }];
    assert!(World::new(PhysicsParams::default(), off_pivot, j, vec![], goal()).is_err());
}

fn run_and_check_side(speed: f64, heading: f64, thickness: f64) -> bool {
    let mut params = PhysicsParams::default();
    params.gravity = Vec2::ZERO;
    let wall_y = 300.0;
    let mut shooter = Body::ball(BodyId(1), Role::RedBall, Vec2::new(300.0, 200.0), 10.0);
    shooter.velocity = Vec2::new(heading.sin(), heading.cos()) * speed;
    let bodies = vec![Body::bar(BodyId(0), Role::Gray, Vec2::new(0.0, wall_y), Vec2::new(600.0, wall_y), thickness), shooter];
    let mut w = World::new(params, bodies, vec![], vec![], GoalRegion { min: Vec2::new(-1.0, -1.0), max: Vec2::new(-1.0, -1.0) }).unwrap();
    for _ in 0..200 {
        w.substep();
        if w.bodies()[1].position.y >= wall_y {
            return false;
        }
    }
    true
}

#[test]
fn fast_ball_does_not_tunnel() {
    assert!(run_and_check_side(2000.0, 0.0, 10.0));
    assert!(run_and_check_side(2000.0, 0.6, 10.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_tunneling_at_scene_speeds(speed in 100.0f64..=2000.0, heading in -1.2f64..1.2, thickness in 10.0f64..30.0) {
        prop_assert!(run_and_check_side(speed, heading, thickness));
    }

    #[test]
    fn stepping_is_deterministic(x in 120.0f64..220.0, drop_at in 0u32..20) {
        let far = GoalRegion { min: Vec2::new(-50.0, -50.0), max: Vec2::new(-40.0, -40.0) };
        let make = || World::new(PhysicsParams::default(), vec![
            bar(0, Role::Gray, (100.0, 300.0), (250.0, 340.0), 10.0),
            Body::ball(BodyId(1), Role::RedBall, Vec2::new(x, 200.0), 12.0),
            bar(2, Role::Blue, (150.0, 250.0), (220.0, 240.0), 10.0),
        ], vec![], vec![], far).unwrap();
        let (mut a, mut b) = (make(), make());
        for k in 0..40 {
            if k == drop_at {
                a.eliminate(BodyId(0)).unwrap();
                b.eliminate(BodyId(0)).unwrap();
            }
            a.step(0.1).unwrap();
            b.step(0.1).unwrap();
            prop_assert_eq!(a.state_hash(), b.state_hash());
        }
    }
}
