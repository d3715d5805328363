//! Narrow-phase contact generation between balls and capsule bars.

use super::body::{Body, Shape};
use super::vec2::closest_point_on_segment;
use super::Vec2;

/// One contact point between bodies `a` and `b` (indices into the world's body list).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Contact {
    pub a: usize,
    pub b: usize,
    /// Unit normal pointing from `a` to `b`.
    pub normal: Vec2,
    pub point: Vec2,
    /// Gap between the surfaces; negative when overlapping.
    pub separation: f64,
}

/// Up to two contact points for a pair, within the speculative `margin`.
pub(crate) fn collide(ia: usize, a: &Body, ib: usize, b: &Body, margin: f64, out: &mut Vec<Contact>) {
    let start = out.len();
    match (a.shape, b.shape) {
        (Shape::Ball { radius: ra }, Shape::Ball { radius: rb }) => {
            if let Some(c) = point_vs_point(a.position, ra, b.position, rb, margin) {
                out.push(Contact { a: ia, b: ib, ..c });
            }
        }
        (Shape::Ball { radius }, Shape::Bar { .. }) => {
            let (p, q) = b.endpoints();
            if let Some(c) = point_vs_segment(a.position, radius, p, q, b.shape.radius(), margin) {
                out.push(Contact { a: ia, b: ib, ..c });
            }
        }
        (Shape::Bar { .. }, Shape::Ball { radius }) => {
            let (p, q) = a.endpoints();
            if let Some(c) = point_vs_segment(b.position, radius, p, q, a.shape.radius(), margin) {
                out.push(Contact { a: ia, b: ib, normal: -c.normal, ..c });
            }
        }
        (Shape::Bar { .. }, Shape::Bar { .. }) => {
            let (a0, a1) = a.endpoints();
            let (b0, b1) = b.endpoints();
            let (ra, rb) = (a.shape.radius(), b.shape.radius());
            let mut found: Vec<Contact> = Vec::with_capacity(4);
            for p in [a0, a1] {
                if let Some(c) = point_vs_segment(p, ra, b0, b1, rb, margin) {
                    found.push(Contact { a: ia, b: ib, ..c });
                }
            }
            for p in [b0, b1] {
                if let Some(c) = point_vs_segment(p, rb, a0, a1, ra, margin) {
                    found.push(Contact { a: ia, b: ib, normal: -c.normal, ..c });
                }
            }
            // Parallel overlapping bars can report the same corner twice.
            found.sort_by(|x, y| x.separation.total_cmp(&y.separation));
            for c in found {
                if out.len() - start >= 2 {
                    break;
                }
                if out[start..].iter().all(|o| o.point.distance(c.point) > 1.0) {
                    out.push(c);
                }
            }
        }
    }
}

fn point_vs_point(pa: Vec2, ra: f64, pb: Vec2, rb: f64, margin: f64) -> Option<Contact> {
    let d = pb - pa;
    let dist = d.length();
    let separation = dist - ra - rb;
    if separation > margin {
        return None;
    }
    let normal = d.normalized().unwrap_or(Vec2::new(0.0, 1.0));
    let sa = pa + normal * ra;
    let sb = pb - normal * rb;
    Some(Contact { a: 0, b: 0, normal, point: (sa + sb) * 0.5, separation })
}

/// Rounded point `p` (radius `rp`) against a capsule `s0`-`s1` (radius `rs`).
/// The normal points from the point towards the segment.
fn point_vs_segment(p: Vec2, rp: f64, s0: Vec2, s1: Vec2, rs: f64, margin: f64) -> Option<Contact> {
    let (q, _) = closest_point_on_segment(p, s0, s1);
    let d = q - p;
    let dist = d.length();
    let separation = dist - rp - rs;
    if separation > margin {
        return None;
    }
    let normal = match d.normalized() {
        Some(n) => n,
        None => {
            // Centre on the axis: push out along the segment normal.
            let axis = (s1 - s0).normalized().unwrap_or(Vec2::new(1.0, 0.0));
            -axis.perp()
        }
    };
    let sa = p + normal * rp;
    let sb = q - normal * rs;
    Some(Contact { a: 0, b: 0, normal, point: (sa + sb) * 0.5, separation })
}
