use serde::{Deserialize, Serialize};

use super::{GameError, GameId, Split};
use crate::physics::{
    Anchor, Body, BodyId, GoalRegion, Joint, JointKind, PhysicsParams, Role, Spring, SpringEnd, Vec2, World,
    MAX_BODIES,
};

/// Version of the scene file layout. Bump whenever geometry or constants change
/// in a way that moves reference rewards.
pub const FORMAT_VERSION: u32 = 1;

/// Width of the action space; scenes never have more gray blocks than this.
pub const MAX_ACTIONS: usize = 6;

/// One elimination on the control grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimedAction {
    pub body: BodyId,
    /// Control step index; the execution time is `step * control_dt`.
    pub step: u32,
}

/// Ordered list of eliminations with their execution times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TimedActionSequence {
    pub entries: Vec<TimedAction>,
}

impl TimedActionSequence {
    /// Body ids in execution order. Eliminations sharing a step run in scene
    /// order, which for gray blocks is ascending id.
    pub fn order(&self) -> Vec<BodyId> {
        let mut e = self.entries.clone();
        e.sort_by_key(|a| (a.step, a.body));
        e.into_iter().map(|a| a.body).collect()
    }

    /// Copy with every entry at `index` moved by `delta` steps.
    pub fn shifted(&self, index: usize, delta: i32) -> Option<TimedActionSequence> {
        let mut out = self.clone();
        let entry = out.entries.get_mut(index)?;
        entry.step = u32::try_from(i64::from(entry.step) + i64::from(delta)).ok()?;
        Some(out)
    }
}

// Serialized as [{"body": 3, "time": 1.2}, ...] with times in seconds.
#[derive(Serialize, Deserialize)]
struct TimedActionJson {
    body: BodyId,
    time: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    entries: Vec<TimedActionJson>,
}

impl SequenceJson {
    fn to_sequence(&self, dt: f64, max_steps: u32) -> Result<TimedActionSequence, String> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let steps = e.time / dt;
            let step = steps.round();
            if !(0.0..f64::from(max_steps)).contains(&step) || (steps - step).abs() > 1e-6 {
                return Err(format!("time {} s is not on the {} s grid within the episode", e.time, dt));
            }
            if entries.iter().any(|a: &TimedAction| a.body == e.body) {
                return Err(format!("body {} appears twice in one solution", e.body));
            }
            entries.push(TimedAction { body: e.body, step: step as u32 });
        }
        Ok(TimedActionSequence { entries })
    }

    fn from_sequence(seq: &TimedActionSequence, dt: f64) -> Self {
        let entries = seq
            .entries
            .iter()
            .map(|a| TimedActionJson { body: a.body, time: round_time(f64::from(a.step) * dt) })
            .collect();
        SequenceJson { entries }
    }
}

fn round_time(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeJson {
    Ball { center: Vec2, radius: f64 },
    Bar { a: Vec2, b: Vec2, thickness: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyJson {
    pub id: BodyId,
    pub role: Role,
    #[serde(flatten)]
    pub shape: ShapeJson,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub distractor: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointJson {
    pub body: BodyId,
    /// Second body; omitted for a pin to the canvas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<BodyId>,
    pub pivot: Vec2,
    #[serde(default = "pin")]
    pub kind: JointKind,
}

fn pin() -> JointKind {
    JointKind::Pin
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpringJson {
    pub body_a: BodyId,
    pub end_b: SpringEnd,
    pub rest_length: f64,
    pub stiffness: f64,
    pub damping: f64,
}

/// Which reference entry is timing-critical, for sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingProbe {
    pub solution: usize,
    pub entry: usize,
}

/// A documented wrong-order sequence next to the right one.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderDemo {
    pub wrong: TimedActionSequence,
    pub right: TimedActionSequence,
}

#[derive(Serialize, Deserialize)]
struct OrderDemoJson {
    wrong: SequenceJson,
    right: SequenceJson,
}

/// On-disk layout of a scene.
#[derive(Serialize, Deserialize)]
pub struct SceneFile {
    pub format_version: u32,
    pub physics: PhysicsParams,
    pub game_id: GameId,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub provenance: String,
    pub bodies: Vec<BodyJson>,
    #[serde(default)]
    pub joints: Vec<JointJson>,
    #[serde(default)]
    pub springs: Vec<SpringJson>,
    pub goal: GoalRegion,
    #[serde(default = "max_actions")]
    pub max_actions: usize,
    reference_solutions: Vec<SequenceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_order: Option<Vec<BodyId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_critical: Option<TimingProbe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order_demo: Option<OrderDemoJson>,
}

fn max_actions() -> usize {
    MAX_ACTIONS
}

/// A validated, immutable game definition.
#[derive(Debug, Clone)]
pub struct Scene {
    pub game_id: GameId,
    pub provenance: String,
    pub params: PhysicsParams,
    pub bodies: Vec<Body>,
    pub joints: Vec<Joint>,
    pub springs: Vec<Spring>,
    pub goal: GoalRegion,
    pub max_actions: usize,
    pub reference_solutions: Vec<TimedActionSequence>,
    /// Gray blocks added on top of a basic layout (noisy split only).
    pub distractors: Vec<BodyId>,
    /// Canonical elimination order used for failure attribution.
    pub oracle_order: Vec<BodyId>,
    pub timing_critical: Option<TimingProbe>,
    pub order_demo: Option<OrderDemo>,
}

impl Scene {
    pub fn from_json(src: &str) -> Result<Scene, GameError> {
        let file: SceneFile = serde_json::from_str(src).map_err(|e| GameError::SceneInvalid {
            game: "<unparsed>".into(),
            reason: e.to_string(),
        })?;
        Scene::from_file(file)
    }

    pub fn from_file(file: SceneFile) -> Result<Scene, GameError> {
        let game = file.game_id.name.clone();
        let invalid = |reason: String| GameError::SceneInvalid { game: game.clone(), reason };

        if file.format_version != FORMAT_VERSION {
            return Err(invalid(format!("format_version {} (expected {FORMAT_VERSION})", file.format_version)));
        }
        let expected = GameId::parse(&file.game_id.name).map_err(|_| invalid("name is not in the roster".into()))?;
        if expected.split != file.game_id.split {
            return Err(invalid(format!("declared split {} but roster says {}", file.game_id.split, expected.split)));
        }
        if file.max_actions != MAX_ACTIONS {
            return Err(invalid(format!("max_actions must be {MAX_ACTIONS}")));
        }

        let bodies: Vec<Body> = file
            .bodies
            .iter()
            .map(|b| match b.shape {
                ShapeJson::Ball { center, radius } => Body::ball(b.id, b.role, center, radius),
                ShapeJson::Bar { a, b: end, thickness } => Body::bar(b.id, b.role, a, end, thickness),
            })
            .collect();
        if bodies.len() > MAX_BODIES {
            return Err(invalid(format!("{} bodies (limit {MAX_BODIES})", bodies.len())));
        }
        for b in &file.bodies {
            let size_ok = match b.shape {
                ShapeJson::Ball { radius, .. } => radius > 0.0,
                ShapeJson::Bar { a, b: end, thickness } => thickness > 0.0 && a.distance(end) > 0.0,
            };
            if !size_ok {
                return Err(invalid(format!("body {} has a degenerate shape", b.id)));
            }
        }
        let red = bodies.iter().filter(|b| b.role == Role::RedBall).count();
        if red == 0 {
            return Err(invalid("no red ball".into()));
        }
        if file.game_id.split == Split::MultiBall && red < 2 {
            return Err(invalid("multi-ball scenes need at least two red balls".into()));
        }
        let grays = bodies.iter().filter(|b| b.role == Role::Gray).count();
        if grays > MAX_ACTIONS {
            return Err(invalid(format!("{grays} gray blocks exceed the action space of {MAX_ACTIONS}")));
        }
        let distractors: Vec<BodyId> = file.bodies.iter().filter(|b| b.distractor).map(|b| b.id).collect();
        if !distractors.is_empty() && file.game_id.split != Split::Noisy {
            return Err(invalid("only noisy scenes may tag distractors".into()));
        }
        if file.game_id.split == Split::Noisy && distractors.is_empty() {
            return Err(invalid("noisy scenes need at least one distractor".into()));
        }
        for b in file.bodies.iter().filter(|b| b.distractor) {
            if b.role != Role::Gray {
                return Err(invalid(format!("distractor {} is not gray", b.id)));
            }
        }

        let joints: Vec<Joint> = file
            .joints
            .iter()
            .map(|j| Joint {
                body: j.body,
                other: j.other.map_or(Anchor::World, Anchor::Body),
                pivot: j.pivot,
                kind: j.kind,
            })
            .collect();
        let springs: Vec<Spring> = file
            .springs
            .iter()
            .map(|s| Spring {
                body_a: s.body_a,
                end_b: s.end_b,
                rest_length: s.rest_length,
                stiffness: s.stiffness,
                damping: s.damping,
            })
            .collect();

        // Let the physics layer check ids, joints and springs.
        World::new(file.physics, bodies.clone(), joints.clone(), springs.clone(), file.goal)
            .map_err(|e| invalid(e.to_string()))?;

        if file.goal.min.x >= file.goal.max.x || file.goal.min.y >= file.goal.max.y {
            return Err(invalid("goal region is empty".into()));
        }

        let dt = file.physics.control_dt;
        let max_steps = file.physics.max_steps();
        let to_seq = |s: &SequenceJson| -> Result<TimedActionSequence, GameError> {
            let seq = s.to_sequence(dt, max_steps).map_err(&invalid)?;
            for a in &seq.entries {
                match bodies.iter().find(|b| b.id == a.body) {
                    Some(b) if b.role == Role::Gray => {}
                    _ => return Err(invalid(format!("solution eliminates non-gray body {}", a.body))),
                }
            }
            Ok(seq)
        };
        let reference_solutions = file.reference_solutions.iter().map(to_seq).collect::<Result<Vec<_>, _>>()?;
        if reference_solutions.is_empty() {
            return Err(invalid("no reference solution".into()));
        }
        let oracle_order = file.oracle_order.clone().unwrap_or_else(|| reference_solutions[0].order());
        if let Some(p) = file.timing_critical {
            let ok = reference_solutions.get(p.solution).is_some_and(|s| p.entry < s.entries.len());
            if !ok {
                return Err(invalid("timing_critical points outside the reference solutions".into()));
            }
        }
        let order_demo = match &file.order_demo {
            Some(d) => Some(OrderDemo { wrong: to_seq(&d.wrong)?, right: to_seq(&d.right)? }),
            None => None,
        };

        Ok(Scene {
            game_id: file.game_id,
            provenance: file.provenance,
            params: file.physics,
            bodies,
            joints,
            springs,
            goal: file.goal,
            max_actions: file.max_actions,
            reference_solutions,
            distractors,
            oracle_order,
            timing_critical: file.timing_critical,
            order_demo,
        })
    }

    /// Serializes back into the on-disk layout.
    pub fn to_file(&self) -> SceneFile {
        let dt = self.params.control_dt;
        let bodies = self
            .bodies
            .iter()
            .map(|b| BodyJson {
                id: b.id,
                role: b.role,
                shape: match b.shape {
                    crate::physics::Shape::Ball { radius } => ShapeJson::Ball { center: b.position, radius },
                    crate::physics::Shape::Bar { thickness, .. } => {
                        let (a, end) = b.endpoints();
                        ShapeJson::Bar { a: round_vec(a), b: round_vec(end), thickness }
                    }
                },
                distractor: self.distractors.contains(&b.id),
            })
            .collect();
        SceneFile {
            format_version: FORMAT_VERSION,
            physics: self.params,
            game_id: self.game_id.clone(),
            provenance: self.provenance.clone(),
            bodies,
            joints: self
                .joints
                .iter()
                .map(|j| JointJson {
                    body: j.body,
                    other: match j.other {
                        Anchor::World => None,
                        Anchor::Body(id) => Some(id),
                    },
                    pivot: j.pivot,
                    kind: j.kind,
                })
                .collect(),
            springs: self
                .springs
                .iter()
                .map(|s| SpringJson {
                    body_a: s.body_a,
                    end_b: s.end_b,
                    rest_length: s.rest_length,
                    stiffness: s.stiffness,
                    damping: s.damping,
                })
                .collect(),
            goal: self.goal,
            max_actions: self.max_actions,
            reference_solutions: self.reference_solutions.iter().map(|s| SequenceJson::from_sequence(s, dt)).collect(),
            oracle_order: Some(self.oracle_order.clone()),
            timing_critical: self.timing_critical,
            order_demo: self.order_demo.as_ref().map(|d| OrderDemoJson {
                wrong: SequenceJson::from_sequence(&d.wrong, dt),
                right: SequenceJson::from_sequence(&d.right, dt),
            }),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scene serializes")
    }

    /// Fresh world at t = 0.
    pub fn build_world(&self) -> World {
        World::new(self.params, self.bodies.clone(), self.joints.clone(), self.springs.clone(), self.goal)
            .expect("scene was validated at load")
    }

    /// Gray blocks in scene order; these are the occupied action slots.
    pub fn gray_ids(&self) -> Vec<BodyId> {
        self.bodies.iter().filter(|b| b.role == Role::Gray).map(|b| b.id).collect()
    }

    pub fn red_ball_count(&self) -> usize {
        self.bodies.iter().filter(|b| b.role == Role::RedBall).count()
    }

    /// Action slot of a gray body.
    pub fn slot_of(&self, id: BodyId) -> Option<usize> {
        self.gray_ids().iter().position(|g| *g == id)
    }

    /// Copy of the scene with the distractor blocks removed.
    pub fn without_distractors(&self) -> Vec<Body> {
        self.bodies.iter().filter(|b| !self.distractors.contains(&b.id)).cloned().collect()
    }
}

fn round_vec(v: Vec2) -> Vec2 {
    Vec2::new((v.x * 1e6).round() / 1e6, (v.y * 1e6).round() / 1e6)
}
