//! Small planar helpers shared by the other modules.

use nalgebra::Vector2;

pub type Point = Vector2<f64>;

pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of the triangle (a, b, c); positive when counterclockwise.
pub fn signed_area2(a: &Point, b: &Point, c: &Point) -> f64 {
    cross(&(b - a), &(c - a))
}

/// Triangle area from side lengths, Kahan's cancellation-free arrangement of Heron.
///
/// Returns 0 for triples that violate the triangle inequality.
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        0.0
    } else {
        0.25 * p.sqrt()
    }
}

/// Interior angle opposite side `a` in a triangle with sides (a, b, c).
pub fn angle_opposite(a: f64, b: f64, c: f64) -> f64 {
    let area4 = 4.0 * heron_area(a, b, c);
    area4.atan2(b * b + c * c - a * a)
}

/// Barycentric coordinates of `p` with respect to (a, b, c).
pub fn barycentric(p: &Point, a: &Point, b: &Point, c: &Point) -> [f64; 3] {
    let d = signed_area2(a, b, c);
    let l0 = signed_area2(p, b, c) / d;
    let l1 = signed_area2(a, p, c) / d;
    [l0, l1, 1.0 - l0 - l1]
}

/// Distance from `p` to the closed segment [a, b].
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Circle through three points as (center, radius); `None` when collinear.
pub fn circumcircle(a: &Point, b: &Point, c: &Point) -> Option<(Point, f64)> {
    let d = 2.0 * signed_area2(a, b, c);
    if d == 0.0 {
        return None;
    }
    let ba = b - a;
    let ca = c - a;
    let b2 = ba.norm_squared();
    let c2 = ca.norm_squared();
    let ux = (ca.y * b2 - ba.y * c2) / d;
    let uy = (ba.x * c2 - ca.x * b2) / d;
    let off = Point::new(ux, uy);
    Some((a + off, off.norm()))
}
