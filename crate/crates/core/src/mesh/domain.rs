use std::fmt;
use std::sync::Arc;

use crate::geom::{point_segment_distance, Point};

/// Samples per circle when a predicate domain has to test disk containment.
const PREDICATE_CIRCLE_SAMPLES: usize = 256;

type InsideFn = dyn Fn(&Point) -> bool + Send + Sync;

/// A bounded planar region.
#[derive(Clone)]
pub enum Domain {
    Disk { center: Point, radius: f64 },
    Ellipse { center: Point, a: f64, b: f64 },
    /// Simple polygon; either orientation.
    Polygon(Vec<Point>),
    /// Inside-test with a bounding box `(min, max)`. Disk containment is checked on
    /// a sampled circle, so it is approximate.
    Predicate { inside: Arc<InsideFn>, bbox: (Point, Point) },
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disk { center, radius } => write!(f, "Disk({center:?}, {radius})"),
            Domain::Ellipse { center, a, b } => write!(f, "Ellipse({center:?}, {a}, {b})"),
            Domain::Polygon(p) => write!(f, "Polygon({} vertices)", p.len()),
            Domain::Predicate { bbox, .. } => write!(f, "Predicate(bbox {bbox:?})"),
        }
    }
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain::Disk { center: Point::zeros(), radius: 1.0 }
    }

    /// The axis-aligned square `[-h, h]^2`.
    pub fn square(h: f64) -> Self {
        Domain::Polygon(vec![
            Point::new(-h, -h),
            Point::new(h, -h),
            Point::new(h, h),
            Point::new(-h, h),
        ])
    }

    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Domain::Disk { center, radius } => {
                (center - Point::new(*radius, *radius), center + Point::new(*radius, *radius))
            }
            Domain::Ellipse { center, a, b } => (center - Point::new(*a, *b), center + Point::new(*a, *b)),
            Domain::Polygon(p) => {
                let mut lo = p[0];
                let mut hi = p[0];
                for q in p {
                    lo = lo.inf(q);
                    hi = hi.sup(q);
                }
                (lo, hi)
            }
            Domain::Predicate { bbox, .. } => *bbox,
        }
    }

    /// Membership in the open region.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Domain::Disk { center, radius } => (p - center).norm() < *radius,
            Domain::Ellipse { center, a, b } => {
                let d = p - center;
                (d.x / a).powi(2) + (d.y / b).powi(2) < 1.0
            }
            Domain::Polygon(poly) => winding_number(poly, p) != 0 && self.boundary_distance(p).unwrap_or(0.0) > 0.0,
            Domain::Predicate { inside, .. } => inside(p),
        }
    }

    /// Euclidean distance from `p` to the boundary curve; `None` for predicate domains.
    pub fn boundary_distance(&self, p: &Point) -> Option<f64> {
        match self {
            Domain::Disk { center, radius } => Some(((p - center).norm() - radius).abs()),
            Domain::Ellipse { center, a, b } => Some(ellipse_distance(*a, *b, p - center)),
            Domain::Polygon(poly) => {
                let n = poly.len();
                Some(
                    (0..n)
                        .map(|i| point_segment_distance(p, &poly[i], &poly[(i + 1) % n]))
                        .fold(f64::INFINITY, f64::min),
                )
            }
            Domain::Predicate { .. } => None,
        }
    }

    /// Whether the closed disk of radius `r` about `c` lies in the open region.
    pub fn contains_closed_disk(&self, c: &Point, r: f64) -> bool {
        if !self.contains(c) {
            return false;
        }
        match self.boundary_distance(c) {
            Some(d) => d > r,
            None => (0..PREDICATE_CIRCLE_SAMPLES).all(|k| {
                let t = std::f64::consts::TAU * k as f64 / PREDICATE_CIRCLE_SAMPLES as f64;
                self.contains(&(c + Point::new(t.cos(), t.sin()) * r))
            }),
        }
    }

    /// The image of the region under the homothety about `anchor` with ratio `factor`.
    pub fn scaled(&self, anchor: Point, factor: f64) -> Domain {
        let map = move |p: &Point| anchor + (p - anchor) * factor;
        match self {
            Domain::Disk { center, radius } => Domain::Disk { center: map(center), radius: radius * factor },
            Domain::Ellipse { center, a, b } => Domain::Ellipse { center: map(center), a: a * factor, b: b * factor },
            Domain::Polygon(p) => Domain::Polygon(p.iter().map(map).collect()),
            Domain::Predicate { inside, bbox } => {
                let inner = Arc::clone(inside);
                Domain::Predicate {
                    inside: Arc::new(move |p: &Point| inner(&(anchor + (p - anchor) / factor))),
                    bbox: (map(&bbox.0), map(&bbox.1)),
                }
            }
        }
    }
}

fn winding_number(poly: &[Point], p: &Point) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Distance from `q` to the ellipse `x^2/a^2 + y^2/b^2 = 1` by bisection on the
/// Lagrange multiplier (robust for every position, including the axes).
fn ellipse_distance(a: f64, b: f64, q: Point) -> f64 {
    let (e0, e1, y0, y1) = if a >= b { (a, b, q.x.abs(), q.y.abs()) } else { (b, a, q.y.abs(), q.x.abs()) };
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let sbar = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (sbar + r0);
            let x1 = y1 / (sbar + 1.0);
            ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let g = (n0 / (s + r0)).powi(2) + (z1 / (s + 1.0)).powi(2) - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
