use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Vec2;

/// Stable identifier of a body within one scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BodyId(pub u32);

impl fmt::Display for BodyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// What a body is for. The role fixes whether it moves and whether it can be removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Static and eliminable: the only thing a player may act on.
    Gray,
    /// Static scenery.
    Black,
    /// Dynamic, driven by gravity, contacts, joints and springs.
    Blue,
    /// Dynamic ball that has to reach the goal.
    RedBall,
}

impl Role {
    pub fn is_dynamic(self) -> bool {
        matches!(self, Role::Blue | Role::RedBall)
    }

    pub fn is_eliminable(self) -> bool {
        self == Role::Gray
    }
}

/// Geometry in body-local coordinates. Bars are capsules centred on the body
/// origin and aligned with the local x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ball { radius: f64 },
    Bar { half_length: f64, thickness: f64 },
}

impl Shape {
    /// Radius of the rounded profile: the ball radius, or half the bar thickness.
    pub fn radius(&self) -> f64 {
        match *self {
            Shape::Ball { radius } => radius,
            Shape::Bar { thickness, .. } => thickness * 0.5,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Ball { radius } => PI * radius * radius,
            Shape::Bar { half_length, thickness } => {
                let r = thickness * 0.5;
                2.0 * half_length * thickness + PI * r * r
            }
        }
    }

    /// Moment of inertia about the centroid for unit mass.
    pub fn unit_inertia(&self) -> f64 {
        match *self {
            Shape::Ball { radius } => 0.5 * radius * radius,
            Shape::Bar { half_length, thickness } => {
                let len = 2.0 * half_length + thickness;
                (len * len + thickness * thickness) / 12.0
            }
        }
    }

    /// Largest distance from the centroid to the surface.
    pub fn extent(&self) -> f64 {
        match *self {
            Shape::Ball { radius } => radius,
            Shape::Bar { half_length, thickness } => half_length + thickness * 0.5,
        }
    }
}

/// A rigid body and its current state.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub id: BodyId,
    pub role: Role,
    pub shape: Shape,
    pub position: Vec2,
    pub angle: f64,
    pub velocity: Vec2,
    pub angular_velocity: f64,
    pub(crate) inv_mass: f64,
    pub(crate) inv_inertia: f64,
}

impl Body {
    pub fn ball(id: BodyId, role: Role, center: Vec2, radius: f64) -> Self {
        Self::with_shape(id, role, Shape::Ball { radius }, center, 0.0)
    }

    /// A bar spanning `a`..`b`.
    pub fn bar(id: BodyId, role: Role, a: Vec2, b: Vec2, thickness: f64) -> Self {
        let d = b - a;
        Self::with_shape(
            id,
            role,
            Shape::Bar { half_length: d.length() * 0.5, thickness },
            (a + b) * 0.5,
            d.y.atan2(d.x),
        )
    }

    pub fn with_shape(id: BodyId, role: Role, shape: Shape, position: Vec2, angle: f64) -> Self {
        Self {
            id,
            role,
            shape,
            position,
            angle,
            velocity: Vec2::ZERO,
            angular_velocity: 0.0,
            inv_mass: 0.0,
            inv_inertia: 0.0,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.role.is_dynamic()
    }

    pub fn is_eliminable(&self) -> bool {
        self.role.is_eliminable()
    }

    pub fn mass(&self) -> f64 {
        if self.inv_mass > 0.0 {
            1.0 / self.inv_mass
        } else {
            f64::INFINITY
        }
    }

    pub(crate) fn set_density(&mut self, density: f64) {
        if self.is_dynamic() {
            let mass = density * self.shape.area();
            self.inv_mass = 1.0 / mass;
            self.inv_inertia = 1.0 / (mass * self.shape.unit_inertia());
        } else {
            self.inv_mass = 0.0;
            self.inv_inertia = 0.0;
        }
    }

    /// Segment endpoints in world space. Balls report their centre twice.
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        match self.shape {
            Shape::Ball { .. } => (self.position, self.position),
            Shape::Bar { half_length, .. } => {
                let axis = Vec2::new(half_length, 0.0).rotated(self.angle);
                (self.position - axis, self.position + axis)
            }
        }
    }

    pub fn world_point(&self, local: Vec2) -> Vec2 {
        self.position + local.rotated(self.angle)
    }

    pub fn local_point(&self, world: Vec2) -> Vec2 {
        (world - self.position).rotated(-self.angle)
    }

    pub fn velocity_at(&self, world: Vec2) -> Vec2 {
        self.velocity + Vec2::cross_scalar(self.angular_velocity, world - self.position)
    }

    /// Distance from `p` to the body surface; negative inside.
    pub fn surface_distance(&self, p: Vec2) -> f64 {
        let (a, b) = self.endpoints();
        let (q, _) = super::vec2::closest_point_on_segment(p, a, b);
        q.distance(p) - self.shape.radius()
    }

    pub(crate) fn aabb(&self, margin: f64) -> (Vec2, Vec2) {
        let (a, b) = self.endpoints();
        let r = self.shape.radius() + margin;
        (
            Vec2::new(a.x.min(b.x) - r, a.y.min(b.y) - r),
            Vec2::new(a.x.max(b.x) + r, a.y.max(b.y) + r),
        )
    }
}

/// What the second half of a joint attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// A fixed point of the canvas.
    World,
    /// Another body.
    Body(BodyId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    /// Revolute pin: both sides share the pivot point and rotate freely about it.
    Pin,
}

/// Pin joint. `pivot` is given in world coordinates at scene load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub body: BodyId,
    pub other: Anchor,
    pub pivot: Vec2,
    pub kind: JointKind,
}

/// End of a spring that is not `body_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringEnd {
    Body(BodyId),
    Point(Vec2),
}

/// Damped linear spring between body centres (or a body centre and a fixed point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring {
    pub body_a: BodyId,
    pub end_b: SpringEnd,
    pub rest_length: f64,
    pub stiffness: f64,
    pub damping: f64,
}

/// Axis-aligned sensor below the hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub min: Vec2,
    pub max: Vec2,
}

impl GoalRegion {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}
