use serde::{Deserialize, Serialize};

use crate::games::{Scene, MAX_ACTIONS};
use crate::physics::{BodyId, Shape, Vec2, World, MAX_BODIES};

/// Features per object row.
pub const FEATURES: usize = 9;

/// Symbolic scene state: one row per body in scene order, zero-padded to 12.
///
/// Row layout: `[ax, ay, bx, by, radius, eliminable, fixed, jointed, springed]`.
/// Bars report their two endpoints, balls their centre twice. `radius` is the
/// ball radius or half the bar thickness. Eliminated bodies become zero rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub rows: [[f64; FEATURES]; MAX_BODIES],
}

impl Observation {
    pub fn row(&self, i: usize) -> &[f64; FEATURES] {
        &self.rows[i]
    }

    /// Row-major copy, 108 values.
    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

pub fn encode_observation(world: &World) -> Observation {
    let mut rows = [[0.0; FEATURES]; MAX_BODIES];
    for (i, body) in world.bodies().iter().enumerate() {
        if world.is_removed(i) {
            continue;
        }
        let (a, b) = body.endpoints();
        let radius = match body.shape {
            Shape::Ball { radius } => radius,
            Shape::Bar { thickness, .. } => thickness * 0.5,
        };
        let flag = |x: bool| if x { 1.0 } else { 0.0 };
        rows[i] = [
            a.x,
            a.y,
            b.x,
            b.y,
            radius,
            flag(body.is_eliminable()),
            flag(!body.is_dynamic()),
            flag(world.is_jointed(i)),
            flag(world.is_springed(i)),
        ];
    }
    Observation { rows }
}

/// One action slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSlot {
    Occupied { body: BodyId, position: Vec2 },
    Padding,
}

impl ActionSlot {
    /// Sentinel coordinates reported for padding slots.
    pub const PADDING_POSITION: Vec2 = Vec2::new(-1.0, -1.0);

    pub fn position(&self) -> Vec2 {
        match self {
            ActionSlot::Occupied { position, .. } => *position,
            ActionSlot::Padding => Self::PADDING_POSITION,
        }
    }

    pub fn body(&self) -> Option<BodyId> {
        match self {
            ActionSlot::Occupied { body, .. } => Some(*body),
            ActionSlot::Padding => None,
        }
    }
}

/// The gray blocks of a scene at load, padded to six slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub slots: [ActionSlot; MAX_ACTIONS],
}

impl ActionSpace {
    pub fn for_scene(scene: &Scene) -> ActionSpace {
        let mut slots = [ActionSlot::Padding; MAX_ACTIONS];
        let grays = scene.bodies.iter().filter(|b| b.is_eliminable());
        for (slot, body) in slots.iter_mut().zip(grays) {
            *slot = ActionSlot::Occupied { body: body.id, position: body.position };
        }
        ActionSpace { slots }
    }

    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| s.body().is_some()).count()
    }

    /// Flattened slot positions, 12 values.
    pub fn flatten(&self) -> Vec<f64> {
        self.slots.iter().flat_map(|s| [s.position().x, s.position().y]).collect()
    }
}
