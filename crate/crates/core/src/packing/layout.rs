//! Realizing a solved label as circles in the plane or the Poincaré disk.

use std::collections::VecDeque;

use num_complex::Complex64;

use super::{LabelGeometry, PackingError, PackingLabel};
use crate::geom::Point;
use crate::mesh::{rotate_to, Geometry, PlanarRealization, Triangulation};
use crate::mobius::{to_p, Mobius};

/// Tangency slack accepted by [`layout`], in units of the solver tolerance.
pub const LAYOUT_SLACK: f64 = 10.0;

/// Circles realizing a packing label.
///
/// Positions and radii are Euclidean in both geometries. In the Poincaré disk,
/// `markers` holds each circle's hyperbolic center, or its ideal point for horocycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub realization: PlanarRealization,
    pub radii: Vec<f64>,
    pub markers: Option<Vec<Point>>,
}

impl Layout {
    /// Largest relative defect `|d(c_i, c_j) − (ρ_i + ρ_j)| / (ρ_i + ρ_j)` over all edges.
    pub fn tangency_error(&self, t: &Triangulation) -> f64 {
        let p = &self.realization.positions;
        t.edges()
            .iter()
            .map(|&[i, j]| {
                let s = self.radii[i] + self.radii[j];
                ((p[i] - p[j]).norm() - s).abs() / s
            })
            .fold(0.0, f64::max)
    }

    /// Largest `| |c| + ρ − 1 |` over the given circles (horocycle condition).
    pub fn horocycle_error(&self, vertices: &[usize]) -> f64 {
        vertices
            .iter()
            .map(|&v| (self.realization.positions[v].norm() + self.radii[v] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Lay out `label` breadth-first from the triangle containing the directed edge
/// `anchor -> anchor_neighbor`: the anchor circle is centered at the origin and the
/// neighbor's center lies on the positive real axis.
pub fn layout(
    t: &Triangulation,
    label: &PackingLabel,
    anchor: usize,
    anchor_neighbor: usize,
    tol: f64,
) -> Result<Layout, PackingError> {
    if t.is_boundary(anchor) {
        return Err(PackingError::BadInput(format!("anchor {anchor} is a boundary vertex")));
    }
    let first = t
        .triangle_with_half_edge(anchor, anchor_neighbor)
        .ok_or_else(|| PackingError::BadInput(format!("{anchor} -> {anchor_neighbor} is not an edge")))?;
    let out = match label.geometry {
        LabelGeometry::Euclidean => euclidean(t, label, first, anchor)?,
        LabelGeometry::Hyperbolic => hyperbolic(t, label, first, anchor)?,
    };
    let err = out.tangency_error(t);
    if !(err <= LAYOUT_SLACK * tol) {
        return Err(PackingError::LayoutInconsistent { error: err });
    }
    Ok(out)
}

/// Visit triangles breadth-first; `place(tri)` receives `[u, v, w]` in cyclic order with `u`,
/// `v` already placed.
fn sweep(t: &Triangulation, first: usize, mut place: impl FnMut([usize; 3])) {
    let mut seen = vec![false; t.triangles().len()];
    seen[first] = true;
    let mut queue = VecDeque::from([first]);
    while let Some(k) = queue.pop_front() {
        let tri = t.triangles()[k];
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if let Some(j) = t.triangle_with_half_edge(b, a) {
                if !seen[j] {
                    seen[j] = true;
                    place(rotate_to(t.triangles()[j], b));
                    queue.push_back(j);
                }
            }
        }
    }
}

fn euclidean(t: &Triangulation, label: &PackingLabel, first: usize, anchor: usize) -> Result<Layout, PackingError> {
    let r = &label.values;
    let n = t.vertex_count();
    let mut pos: Vec<Option<Point>> = vec![None; n];
    let [u, v, w] = rotate_to(t.triangles()[first], anchor);
    pos[u] = Some(Point::zeros());
    pos[v] = Some(Point::new(r[u] + r[v], 0.0));
    let place = |pos: &mut Vec<Option<Point>>, [u, v, w]: [usize; 3]| {
        if pos[w].is_some() {
            return;
        }
        let (pu, pv) = (pos[u].expect("placed"), pos[v].expect("placed"));
        let dir = (pv - pu).normalize();
        let th = label.angle(u, v, w);
        let (s, c) = th.sin_cos();
        let rot = Point::new(c * dir.x - s * dir.y, s * dir.x + c * dir.y);
        pos[w] = Some(pu + rot * (r[u] + r[w]));
    };
    place(&mut pos, [u, v, w]);
    sweep(t, first, |tri| place(&mut pos, tri));
    let positions = collect(pos)?;
    Ok(Layout { realization: PlanarRealization::new(positions, Geometry::Euclidean), radii: r.clone(), markers: None })
}

fn collect(pos: Vec<Option<Point>>) -> Result<Vec<Point>, PackingError> {
    pos.into_iter()
        .map(|p| p.ok_or_else(|| PackingError::BadInput("triangulation is not connected".into())))
        .collect()
}

/// Hyperbolic circle in the disk: marker (center or ideal point), Euclidean center and radius.
#[derive(Debug, Clone, Copy)]
struct DiskCircle {
    marker: Complex64,
    center: Complex64,
    radius: f64,
}

/// Circle at the origin with `s = e^{-r}`.
fn origin_circle(s: f64) -> DiskCircle {
    let z = Complex64::new(0.0, 0.0);
    DiskCircle { marker: z, center: z, radius: (1.0 - s) / (1.0 + s) }
}

/// Circle with label `sx` on the ray at angle `phi`, tangent to the origin circle `s0`.
fn ray_circle(s0: f64, sx: f64, phi: f64) -> DiskCircle {
    let dir = Complex64::from_polar(1.0, phi);
    let x1 = (1.0 - s0) / (1.0 + s0);
    let far = s0 * sx * sx;
    let x2 = (1.0 - far) / (1.0 + far);
    let mid = s0 * sx;
    DiskCircle {
        marker: dir * ((1.0 - mid) / (1.0 + mid)),
        center: dir * (0.5 * (x1 + x2)),
        radius: (s0 - far) / ((1.0 + far) * (1.0 + s0)),
    }
}

/// Canonical position of the triangle `(u, v, w)` (counterclockwise) of circles with labels `s`.
fn canonical(s: [f64; 3]) -> [DiskCircle; 3] {
    let [su, sv, sw] = s;
    let ang = |a: f64, b: f64, c: f64| super::angles::hyperbolic_angle(a, b, c);
    if su > 0.0 {
        [origin_circle(su), ray_circle(su, sv, 0.0), ray_circle(su, sw, ang(su, sv, sw))]
    } else if sv > 0.0 {
        [ray_circle(sv, su, 0.0), origin_circle(sv), ray_circle(sv, sw, -ang(sv, sw, su))]
    } else if sw > 0.0 {
        [ray_circle(sw, su, 0.0), ray_circle(sw, sv, ang(sw, su, sv)), origin_circle(sw)]
    } else {
        let rho = 3f64.sqrt() / (2.0 + 3f64.sqrt());
        let mk = |k: f64| {
            let p = Complex64::from_polar(1.0, k * std::f64::consts::TAU / 3.0);
            DiskCircle { marker: p, center: p * (1.0 - rho), radius: rho }
        };
        [mk(0.0), mk(1.0), mk(2.0)]
    }
}

fn tangency_point(a: &DiskCircle, b: &DiskCircle) -> Complex64 {
    a.center + (b.center - a.center) * (a.radius / (a.radius + b.radius))
}

/// Euclidean circle of the hyperbolic circle with center `z` and `s = e^{-r} > 0`.
fn circle_about(z: Complex64, s: f64) -> DiskCircle {
    let rho = z.norm();
    let dir = if rho > 0.0 { z / rho } else { Complex64::new(1.0, 0.0) };
    let t = (1.0 - rho) / (1.0 + rho);
    let radius = t * (1.0 - s * s) / ((1.0 + t * s) * (s + t));
    let outer = (1.0 - t * s) / (1.0 + t * s);
    DiskCircle { marker: z, center: dir * (outer - radius), radius }
}

/// Horocycle at the ideal point `zeta` through the interior point `q`.
fn horocycle_through(zeta: Complex64, q: Complex64) -> DiskCircle {
    let gap = zeta - q;
    let radius = gap.norm_sqr() / (2.0 * (zeta.conj() * gap).re);
    DiskCircle { marker: zeta, center: zeta * (1.0 - radius), radius }
}

/// Carry a canonical circle back through the disk isometry `z ↦ (z + c)/(1 + c̄ z)`.
/// `touch` is the circle's canonical tangency point with the pivot.
fn from_pivot(c: Complex64, can: DiskCircle, s: f64, touch: Complex64) -> DiskCircle {
    let back = |z: Complex64| (z + c) / (Complex64::new(1.0, 0.0) + c.conj() * z);
    if s > 0.0 {
        circle_about(back(can.marker), s)
    } else {
        let zeta = back(can.marker);
        horocycle_through(zeta / zeta.norm(), back(touch))
    }
}

/// Place `w` in the counterclockwise triangle `(u, v, w)` given the circles of `u` and `v`.
fn place_third(s: [f64; 3], cu: &DiskCircle, cv: &DiskCircle) -> DiskCircle {
    let [su, sv, sw] = s;
    let ang = super::angles::hyperbolic_angle;
    let to_pivot = |c: Complex64, z: Complex64| (z - c) / (Complex64::new(1.0, 0.0) - c.conj() * z);
    if su > 0.0 || sv > 0.0 {
        let (pivot, sp, other, phi_sign, theta) =
            if su > 0.0 { (cu, su, cv, 1.0, ang(su, sv, sw)) } else { (cv, sv, cu, -1.0, ang(sv, sw, su)) };
        let c = pivot.marker;
        let phi = to_pivot(c, other.marker).arg() + phi_sign * theta;
        let can = ray_circle(sp, sw, phi);
        let touch = Complex64::from_polar((1.0 - sp) / (1.0 + sp), phi);
        return from_pivot(c, can, sw, touch);
    }
    let can = canonical(s);
    let m = Mobius::from_three_points(
        [can[0].marker, tangency_point(&can[0], &can[1]), can[1].marker],
        [cu.marker, tangency_point(cu, cv), cv.marker],
    );
    let marker = m.apply(can[2].marker);
    if sw > 0.0 {
        circle_about(marker, sw)
    } else {
        horocycle_through(marker / marker.norm(), m.apply(tangency_point(&can[0], &can[2])))
    }
}

fn hyperbolic(t: &Triangulation, label: &PackingLabel, first: usize, anchor: usize) -> Result<Layout, PackingError> {
    let s = &label.values;
    let n = t.vertex_count();
    let mut circ: Vec<Option<DiskCircle>> = vec![None; n];
    let [u, v, w] = rotate_to(t.triangles()[first], anchor);
    let c0 = canonical([s[u], s[v], s[w]]);
    circ[u] = Some(c0[0]);
    circ[v] = Some(c0[1]);
    circ[w] = Some(c0[2]);
    let place = |circ: &mut Vec<Option<DiskCircle>>, [u, v, w]: [usize; 3]| {
        if circ[w].is_some() {
            return;
        }
        let (cu, cv) = (circ[u].expect("placed"), circ[v].expect("placed"));
        circ[w] = Some(place_third([s[u], s[v], s[w]], &cu, &cv));
    };
    sweep(t, first, |tri| place(&mut circ, tri));
    let circles: Vec<DiskCircle> = circ
        .into_iter()
        .map(|c| c.ok_or_else(|| PackingError::BadInput("triangulation is not connected".into())))
        .collect::<Result<_, _>>()?;
    Ok(Layout {
        realization: PlanarRealization::new(circles.iter().map(|c| to_p(c.center)).collect(), Geometry::Poincare),
        radii: circles.iter().map(|c| c.radius).collect(),
        markers: Some(circles.iter().map(|c| to_p(c.marker)).collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_triangulation;
    use crate::packing::{solve_maximal_hyperbolic, SolverConfig};
    use std::f64::consts::PI;

    fn flower() -> Triangulation {
        let tris: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
        build_triangulation(&tris).unwrap()
    }

    #[test]
    fn unit_flower_petals_at_sixths() {
        let t = flower();
        let lay = layout(&t, &PackingLabel::euclidean(vec![1.0; 7]), 0, 1, 1e-12).unwrap();
        let p = &lay.realization.positions;
        assert_eq!(p[0], Point::zeros());
        for k in 0..6 {
            let a = k as f64 * PI / 3.0;
            assert!((p[1 + k] - Point::new(2.0 * a.cos(), 2.0 * a.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn ray_circle_touches_origin_circle() {
        let (s0, s1) = (0.4, 0.7);
        let a = origin_circle(s0);
        let b = ray_circle(s0, s1, 0.3);
        assert!(((b.center - a.center).norm() - a.radius - b.radius).abs() < 1e-15);
        let h = ray_circle(s0, 0.0, 1.0);
        assert!((h.center.norm() + h.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_triangle_horocycles_are_tangent() {
        let c = canonical([0.0, 0.0, 0.0]);
        for i in 0..3 {
            let (a, b) = (c[i], c[(i + 1) % 3]);
            assert!(((a.center - b.center).norm() - a.radius - b.radius).abs() < 1e-15);
            assert!((a.center.norm() + a.radius - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn maximal_flower_horocycles() {
        let t = flower();
        let (label, _) = solve_maximal_hyperbolic(&t, &SolverConfig::default()).unwrap();
        let lay = layout(&t, &label, 0, 1, 1e-10).unwrap();
        assert!(lay.horocycle_error(&t.boundary_vertices()) < 1e-12);
        assert!(lay.tangency_error(&t) < 1e-12);
        assert_eq!(lay.realization.positions[0], Point::zeros());
        assert!(lay.realization.positions[1].y.abs() < 1e-15 && lay.realization.positions[1].x > 0.0);
    }
}
