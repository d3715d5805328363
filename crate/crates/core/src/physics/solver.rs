//! Sequential-impulse velocity constraints: contacts with Coulomb friction and
//! revolute pins. Positions are corrected through Baumgarte bias terms.

use super::collide::Contact;
use super::Vec2;

/// Per-body velocity state used while iterating.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Motion {
    pub v: Vec2,
    pub w: f64,
    pub inv_mass: f64,
    pub inv_inertia: f64,
}

impl Motion {
    fn apply(&mut self, impulse: Vec2, r: Vec2) {
        self.v += impulse * self.inv_mass;
        self.w += self.inv_inertia * r.cross(impulse);
    }

    fn point_velocity(&self, r: Vec2) -> Vec2 {
        self.v + Vec2::cross_scalar(self.w, r)
    }
}

/// Bias constants shared by all constraints of one substep.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverSettings {
    pub dt: f64,
    pub baumgarte: f64,
    pub slop: f64,
    pub restitution: f64,
    pub friction: f64,
    /// Approach speed (px/s) below which contacts do not bounce.
    pub bounce_threshold: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ContactConstraint {
    a: usize,
    b: usize,
    normal: Vec2,
    ra: Vec2,
    rb: Vec2,
    normal_mass: f64,
    tangent_mass: f64,
    target: f64,
    normal_impulse: f64,
    tangent_impulse: f64,
}

impl ContactConstraint {
    pub fn new(c: &Contact, positions: (Vec2, Vec2), motions: &[Motion], s: &SolverSettings) -> Self {
        let (ma, mb) = (motions[c.a], motions[c.b]);
        let ra = c.point - positions.0;
        let rb = c.point - positions.1;
        let n = c.normal;
        let t = n.perp();
        let k = |dir: Vec2| {
            let rna = ra.cross(dir);
            let rnb = rb.cross(dir);
            ma.inv_mass + mb.inv_mass + ma.inv_inertia * rna * rna + mb.inv_inertia * rnb * rnb
        };
        let kn = k(n);
        let kt = k(t);
        let vn = (mb.point_velocity(rb) - ma.point_velocity(ra)).dot(n);
        let target = if c.separation > 0.0 {
            // Speculative: allow closing the gap this substep, nothing more.
            -c.separation / s.dt
        } else {
            let push = s.baumgarte / s.dt * (-c.separation - s.slop).max(0.0);
            let bounce = if vn < -s.bounce_threshold { -s.restitution * vn } else { 0.0 };
            push.max(bounce)
        };
        Self {
            a: c.a,
            b: c.b,
            normal: n,
            ra,
            rb,
            normal_mass: if kn > 0.0 { 1.0 / kn } else { 0.0 },
            tangent_mass: if kt > 0.0 { 1.0 / kt } else { 0.0 },
            target,
            normal_impulse: 0.0,
            tangent_impulse: 0.0,
        }
    }

    pub fn solve(&mut self, motions: &mut [Motion], s: &SolverSettings) {
        let (mut ma, mut mb) = (motions[self.a], motions[self.b]);
        let n = self.normal;
        let t = n.perp();

        // Friction first, bounded by the current normal impulse.
        let vt = (mb.point_velocity(self.rb) - ma.point_velocity(self.ra)).dot(t);
        let max_friction = s.friction * self.normal_impulse;
        let old = self.tangent_impulse;
        self.tangent_impulse = (old - self.tangent_mass * vt).clamp(-max_friction, max_friction);
        let p = t * (self.tangent_impulse - old);
        ma.apply(-p, self.ra);
        mb.apply(p, self.rb);

        let vn = (mb.point_velocity(self.rb) - ma.point_velocity(self.ra)).dot(n);
        let old = self.normal_impulse;
        self.normal_impulse = (old - self.normal_mass * (vn - self.target)).max(0.0);
        let p = n * (self.normal_impulse - old);
        ma.apply(-p, self.ra);
        mb.apply(p, self.rb);

        motions[self.a] = ma;
        motions[self.b] = mb;
    }
}

/// Point-to-point constraint. `b == None` pins to a fixed world point.
#[derive(Debug, Clone)]
pub(crate) struct PinConstraint {
    a: usize,
    b: Option<usize>,
    ra: Vec2,
    rb: Vec2,
    // Inverse of the 2x2 effective mass matrix, row major.
    inv_k: [f64; 4],
    bias: Vec2,
}

impl PinConstraint {
    /// `anchor_a` / `anchor_b` are the current world positions of the two attachment points.
    pub fn new(
        a: usize,
        b: Option<usize>,
        anchor_a: Vec2,
        anchor_b: Vec2,
        centres: (Vec2, Vec2),
        motions: &[Motion],
        s: &SolverSettings,
    ) -> Self {
        let ma = motions[a];
        let ra = anchor_a - centres.0;
        let (rb, mb_inv, ib_inv) = match b {
            Some(bi) => (anchor_b - centres.1, motions[bi].inv_mass, motions[bi].inv_inertia),
            None => (Vec2::ZERO, 0.0, 0.0),
        };
        let m = ma.inv_mass + mb_inv;
        let (ia, ib) = (ma.inv_inertia, ib_inv);
        let k11 = m + ia * ra.y * ra.y + ib * rb.y * rb.y;
        let k12 = -ia * ra.x * ra.y - ib * rb.x * rb.y;
        let k22 = m + ia * ra.x * ra.x + ib * rb.x * rb.x;
        let det = k11 * k22 - k12 * k12;
        let inv_k = if det.abs() > 1e-18 {
            let d = 1.0 / det;
            [k22 * d, -k12 * d, -k12 * d, k11 * d]
        } else {
            [0.0; 4]
        };
        let error = anchor_b - anchor_a;
        Self { a, b, ra, rb, inv_k, bias: error * (s.baumgarte / s.dt) }
    }

    pub fn solve(&mut self, motions: &mut [Motion]) {
        let mut ma = motions[self.a];
        let vb = match self.b {
            Some(bi) => motions[bi].point_velocity(self.rb),
            None => Vec2::ZERO,
        };
        let cdot = vb - ma.point_velocity(self.ra) + self.bias;
        let k = &self.inv_k;
        let p = -Vec2::new(k[0] * cdot.x + k[1] * cdot.y, k[2] * cdot.x + k[3] * cdot.y);
        ma.apply(-p, self.ra);
        motions[self.a] = ma;
        if let Some(bi) = self.b {
            motions[bi].apply(p, self.rb);
        }
    }
}
