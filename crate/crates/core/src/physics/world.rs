use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::body::{Anchor, Body, BodyId, GoalRegion, Joint, Role, Spring, SpringEnd};
use super::collide::{collide, Contact};
use super::solver::{ContactConstraint, Motion, PinConstraint, SolverSettings};
use super::{PhysicsError, PhysicsParams, Vec2};

/// Episode state of a world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Success,
    Timeout,
}

/// A gray block removed at `time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub body: BodyId,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct ResolvedJoint {
    a: usize,
    b: Option<usize>,
    local_a: Vec2,
    /// Local anchor on `b`, or the fixed world point when `b` is `None`.
    local_b: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
struct ResolvedSpring {
    a: usize,
    b: Result<usize, Vec2>,
    rest_length: f64,
    stiffness: f64,
    damping: f64,
}

/// Mutable simulation state of one scene.
///
/// Bodies keep their scene order for the whole episode; eliminated bodies stay
/// in the list and are flagged as removed.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    params: PhysicsParams,
    bodies: Vec<Body>,
    removed: Vec<bool>,
    in_goal: Vec<bool>,
    joints: Vec<Joint>,
    resolved_joints: Vec<ResolvedJoint>,
    springs: Vec<Spring>,
    resolved_springs: Vec<ResolvedSpring>,
    goal: GoalRegion,
    steps: u32,
    eliminated: Vec<Elimination>,
    status: Status,
}

impl World {
    pub fn new(
        params: PhysicsParams,
        mut bodies: Vec<Body>,
        joints: Vec<Joint>,
        springs: Vec<Spring>,
        goal: GoalRegion,
    ) -> Result<Self, PhysicsError> {
        params.validate()?;
        if bodies.len() > super::MAX_BODIES {
            return Err(PhysicsError::InvalidWorld(format!(
                "{} bodies exceed the limit of {}",
                bodies.len(),
                super::MAX_BODIES
            )));
        }
        for (i, b) in bodies.iter().enumerate() {
            if bodies[..i].iter().any(|o| o.id == b.id) {
                return Err(PhysicsError::InvalidWorld(format!("duplicate body id {}", b.id)));
            }
            if !b.position.is_finite() || !b.angle.is_finite() {
                return Err(PhysicsError::InvalidWorld(format!("body {} has a non-finite pose", b.id)));
            }
            if b.role == Role::RedBall && !matches!(b.shape, super::Shape::Ball { .. }) {
                return Err(PhysicsError::InvalidWorld(format!("red body {} is not a ball", b.id)));
            }
        }
        for b in bodies.iter_mut() {
            b.set_density(params.density);
            if !b.is_dynamic() {
                b.velocity = Vec2::ZERO;
                b.angular_velocity = 0.0;
            }
        }
        let index = |id: BodyId| {
            bodies
                .iter()
                .position(|b| b.id == id)
                .ok_or(PhysicsError::UnknownBody(id))
        };

        let mut resolved_joints = Vec::with_capacity(joints.len());
        for j in &joints {
            let a = index(j.body)?;
            if bodies[a].surface_distance(j.pivot) > 1e-6 {
                return Err(PhysicsError::InvalidWorld(format!(
                    "pivot of joint on {} lies off its geometry",
                    j.body
                )));
            }
            let b = match j.other {
                Anchor::World => None,
                Anchor::Body(id) => Some(index(id)?),
            };
            if b == Some(a) {
                return Err(PhysicsError::InvalidWorld(format!("joint on {} attaches to itself", j.body)));
            }
            resolved_joints.push(ResolvedJoint {
                a,
                b,
                local_a: bodies[a].local_point(j.pivot),
                local_b: match b {
                    Some(bi) => bodies[bi].local_point(j.pivot),
                    None => j.pivot,
                },
            });
        }

        let mut resolved_springs = Vec::with_capacity(springs.len());
        for s in &springs {
            if !(s.rest_length > 0.0 && s.stiffness > 0.0 && s.damping >= 0.0) {
                return Err(PhysicsError::InvalidWorld(format!(
                    "spring on {} needs positive rest length and stiffness",
                    s.body_a
                )));
            }
            resolved_springs.push(ResolvedSpring {
                a: index(s.body_a)?,
                b: match s.end_b {
                    SpringEnd::Body(id) => Ok(index(id)?),
                    SpringEnd::Point(p) => Err(p),
                },
                rest_length: s.rest_length,
                stiffness: s.stiffness,
                damping: s.damping,
            });
        }

        let n = bodies.len();
        Ok(Self {
            params,
            bodies,
            removed: vec![false; n],
            in_goal: vec![false; n],
            joints,
            resolved_joints,
            springs,
            resolved_springs,
            goal,
            steps: 0,
            eliminated: Vec::new(),
            status: Status::Running,
        })
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    /// All bodies in scene order, including eliminated ones.
    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn springs(&self) -> &[Spring] {
        &self.springs
    }

    pub fn goal(&self) -> GoalRegion {
        self.goal
    }

    pub fn body(&self, id: BodyId) -> Option<&Body> {
        self.bodies.iter().find(|b| b.id == id)
    }

    pub fn index_of(&self, id: BodyId) -> Option<usize> {
        self.bodies.iter().position(|b| b.id == id)
    }

    pub fn is_removed(&self, index: usize) -> bool {
        self.removed[index]
    }

    /// Body at `index` takes part in a joint whose bodies are all still present.
    pub fn is_jointed(&self, index: usize) -> bool {
        self.resolved_joints
            .iter()
            .filter(|j| self.joint_active(j))
            .any(|j| j.a == index || j.b == Some(index))
    }

    pub fn is_springed(&self, index: usize) -> bool {
        self.resolved_springs
            .iter()
            .filter(|s| self.spring_active(s))
            .any(|s| s.a == index || s.b == Ok(index))
    }

    /// Control steps taken so far.
    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Elapsed simulated time in seconds.
    pub fn time(&self) -> f64 {
        f64::from(self.steps) * self.params.control_dt
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn eliminated(&self) -> &[Elimination] {
        &self.eliminated
    }

    /// Removes a gray block. It stops existing before the next substep.
    pub fn eliminate(&mut self, id: BodyId) -> Result<(), PhysicsError> {
        if self.status != Status::Running {
            return Err(PhysicsError::EpisodeOver);
        }
        let idx = self.index_of(id).ok_or(PhysicsError::UnknownBody(id))?;
        if !self.bodies[idx].is_eliminable() {
            return Err(PhysicsError::NotEliminable(id));
        }
        if self.removed[idx] {
            return Err(PhysicsError::AlreadyEliminated(id));
        }
        self.removed[idx] = true;
        self.eliminated.push(Elimination { body: id, time: self.time() });
        Ok(())
    }

    /// True once every red ball's centre has entered the goal region.
    pub fn goal_reached(&self) -> bool {
        let mut any = false;
        for (i, b) in self.bodies.iter().enumerate() {
            if b.role == Role::RedBall {
                any = true;
                if !self.in_goal[i] {
                    return false;
                }
            }
        }
        any
    }

    /// Advances one control step.
    pub fn step(&mut self, control_dt: f64) -> Result<Status, PhysicsError> {
        if self.status != Status::Running {
            return Err(PhysicsError::NotRunning(self.status));
        }
        if (control_dt - self.params.control_dt).abs() > 1e-12 {
            return Err(PhysicsError::ControlStep { expected: self.params.control_dt, got: control_dt });
        }
        for _ in 0..self.params.substeps {
            self.substep();
        }
        self.steps += 1;
        if self.goal_reached() {
            self.status = Status::Success;
        } else if self.steps >= self.params.max_steps() {
            self.status = Status::Timeout;
        }
        Ok(self.status)
    }

    /// One physics substep of `control_dt / substeps` seconds. Does not advance
    /// the control clock or update the status; [`World::step`] does both.
    pub fn substep(&mut self) {
        let p = &self.params;
        let dt = p.control_dt / f64::from(p.substeps);
        let settings = SolverSettings {
            dt,
            baumgarte: p.baumgarte,
            slop: p.linear_slop,
            restitution: p.restitution,
            friction: p.friction,
            bounce_threshold: p.bounce_threshold,
        };
        let gravity = p.gravity;

        let mut motions: Vec<Motion> = self
            .bodies
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let live = b.is_dynamic() && !self.removed[i];
                Motion {
                    v: b.velocity,
                    w: b.angular_velocity,
                    inv_mass: if live { b.inv_mass } else { 0.0 },
                    inv_inertia: if live { b.inv_inertia } else { 0.0 },
                }
            })
            .collect();

        // Spring damping reads start-of-substep velocities.
        self.apply_springs(&mut motions, dt);
        for m in motions.iter_mut().filter(|m| m.inv_mass > 0.0) {
            m.v += gravity * dt;
        }

        let contacts = self.find_contacts(&motions, dt);
        let mut contact_rows: Vec<ContactConstraint> = contacts
            .iter()
            .map(|c| {
                let centres = (self.bodies[c.a].position, self.bodies[c.b].position);
                ContactConstraint::new(c, centres, &motions, &settings)
            })
            .collect();
        let mut pin_rows: Vec<PinConstraint> = self
            .resolved_joints
            .iter()
            .filter(|j| self.joint_active(j))
            .map(|j| {
                let ba = &self.bodies[j.a];
                let anchor_a = ba.world_point(j.local_a);
                let (anchor_b, centre_b) = match j.b {
                    Some(bi) => {
                        let bb = &self.bodies[bi];
                        (bb.world_point(j.local_b), bb.position)
                    }
                    None => (j.local_b, j.local_b),
                };
                PinConstraint::new(j.a, j.b, anchor_a, anchor_b, (ba.position, centre_b), &motions, &settings)
            })
            .collect();

        for _ in 0..self.params.solver_iterations {
            for row in pin_rows.iter_mut() {
                row.solve(&mut motions);
            }
            for row in contact_rows.iter_mut() {
                row.solve(&mut motions, &settings);
            }
        }

        for (i, b) in self.bodies.iter_mut().enumerate() {
            if !b.is_dynamic() || self.removed[i] {
                continue;
            }
            b.velocity = motions[i].v;
            b.angular_velocity = motions[i].w;
            b.position += b.velocity * dt;
            b.angle += b.angular_velocity * dt;
            if b.role == Role::RedBall && self.goal.contains(b.position) {
                self.in_goal[i] = true;
            }
        }
    }

    fn joint_active(&self, j: &ResolvedJoint) -> bool {
        !self.removed[j.a] && j.b.is_none_or(|b| !self.removed[b])
    }

    fn spring_active(&self, s: &ResolvedSpring) -> bool {
        !self.removed[s.a]
            && match s.b {
                Ok(b) => !self.removed[b],
                Err(_) => true,
            }
    }

    fn apply_springs(&self, motions: &mut [Motion], dt: f64) {
        for s in self.resolved_springs.iter().filter(|s| self.spring_active(s)) {
            let pa = self.bodies[s.a].position;
            let (pb, vb) = match s.b {
                Ok(bi) => (self.bodies[bi].position, motions[bi].v),
                Err(point) => (point, Vec2::ZERO),
            };
            let d = pb - pa;
            let Some(dir) = d.normalized() else { continue };
            let stretch = d.length() - s.rest_length;
            let closing = (vb - motions[s.a].v).dot(dir);
            // Positive tension pulls the two ends together.
            let tension = s.stiffness * stretch + s.damping * closing;
            let f = dir * (tension * dt);
            motions[s.a].v += f * motions[s.a].inv_mass;
            if let Ok(bi) = s.b {
                motions[bi].v -= f * motions[bi].inv_mass;
            }
        }
    }

    fn linked(&self, i: usize, j: usize) -> bool {
        self.resolved_joints.iter().any(|r| {
            self.joint_active(r) && ((r.a == i && r.b == Some(j)) || (r.a == j && r.b == Some(i)))
        })
    }

    fn find_contacts(&self, motions: &[Motion], dt: f64) -> Vec<Contact> {
        let margins: Vec<f64> = self
            .bodies
            .iter()
            .zip(motions)
            .map(|(b, m)| (m.v.length() + m.w.abs() * b.shape.extent()) * dt + self.params.linear_slop)
            .collect();
        let boxes: Vec<(Vec2, Vec2)> = self
            .bodies
            .iter()
            .zip(&margins)
            .map(|(b, &m)| b.aabb(m))
            .collect();
        let mut out = Vec::new();
        let n = self.bodies.len();
        for i in 0..n {
            if self.removed[i] {
                continue;
            }
            for j in (i + 1)..n {
                if self.removed[j] {
                    continue;
                }
                let (a, b) = (&self.bodies[i], &self.bodies[j]);
                if !a.is_dynamic() && !b.is_dynamic() {
                    continue;
                }
                let (lo_a, hi_a) = boxes[i];
                let (lo_b, hi_b) = boxes[j];
                if lo_a.x > hi_b.x || lo_b.x > hi_a.x || lo_a.y > hi_b.y || lo_b.y > hi_a.y {
                    continue;
                }
                if self.linked(i, j) {
                    continue;
                }
                collide(i, a, j, b, margins[i] + margins[j], &mut out);
            }
        }
        out
    }

    /// 64-bit digest of body poses and velocities (fixed point, 1e-6 units),
    /// removal flags, goal latches and the elimination log.
    pub fn state_hash(&self) -> u64 {
        let mut h = Sha256::new();
        let q = |x: f64| ((x * 1e6).round() as i64).to_le_bytes();
        for (i, b) in self.bodies.iter().enumerate() {
            h.update(b.id.0.to_le_bytes());
            h.update([u8::from(self.removed[i]), u8::from(self.in_goal[i])]);
            for x in [b.position.x, b.position.y, b.angle, b.velocity.x, b.velocity.y, b.angular_velocity] {
                h.update(q(x));
            }
        }
        for e in &self.eliminated {
            h.update(e.body.0.to_le_bytes());
            h.update(q(e.time));
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 yields 32 bytes"))
    }
}
