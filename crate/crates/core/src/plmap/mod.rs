//! Piecewise linear maps between two realizations of one triangulation.
//!
//! Each triangle of the domain realization is mapped affinely onto the corresponding
//! image triangle. The diagnostics in [`diagnostics`] compare the two sides through the
//! ratio field `H = e^{f̃}/e^{f}`, its squared linear interpolation `e^F`, and the
//! pullback metric.

pub mod diagnostics;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::geom::{barycentric, signed_area2, Point};
use crate::mesh::{PlanarRealization, Triangulation};
use crate::structure::TriangleMetric;

pub use diagnostics::{
    edge_sandwich_check, ef_lipschitz_check, estimate_ldcr, generation_distance_check, generation_lower_bound_check,
    h_sandwich_check, interpolate_ef, metric_sandwich_check, ratio_field, CheckReport, CheckRow, IdKind,
    InterpolatedFactor, LdcrEstimate, RatioField,
};

/// Barycentric slack for point location.
const LOCATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlMapError {
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("triangle {0} changes orientation")]
    OrientationMismatch(usize),
    #[error("point ({0}, {1}) lies outside the carrier")]
    OutsideCarrier(f64, f64),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
}

/// `x ↦ linear·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub linear: Matrix2<f64>,
    pub offset: Vector2<f64>,
}

impl Affine {
    pub fn apply(&self, p: &Point) -> Point {
        self.linear * p + self.offset
    }
}

#[derive(Debug, Clone)]
pub struct PLMap {
    pub triangulation: Triangulation,
    pub domain: Vec<Point>,
    pub image: Vec<Point>,
    pub pieces: Vec<Affine>,
}

fn edge_matrix(p: &[Point], tri: [usize; 3]) -> Matrix2<f64> {
    let (e1, e2) = (p[tri[1]] - p[tri[0]], p[tri[2]] - p[tri[0]]);
    Matrix2::new(e1.x, e2.x, e1.y, e2.y)
}

/// Affine maps sending each domain triangle onto its image triangle. Domain triangles must
/// be positively oriented and image triangles must keep that orientation.
pub fn build_plmap(
    t: &Triangulation,
    domain: &PlanarRealization,
    image: &PlanarRealization,
) -> Result<PLMap, PlMapError> {
    let n = t.vertex_count();
    if domain.positions.len() != n || image.positions.len() != n {
        return Err(PlMapError::SizeMismatch(format!(
            "{} vertices, {} domain and {} image positions",
            n,
            domain.positions.len(),
            image.positions.len()
        )));
    }
    let (p, q) = (&domain.positions, &image.positions);
    let mut pieces = Vec::with_capacity(t.triangles().len());
    for (k, &tri) in t.triangles().iter().enumerate() {
        let a = signed_area2(&p[tri[0]], &p[tri[1]], &p[tri[2]]);
        let b = signed_area2(&q[tri[0]], &q[tri[1]], &q[tri[2]]);
        if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(PlMapError::DegenerateTriangle(k));
        }
        if a < 0.0 || b < 0.0 {
            return Err(PlMapError::OrientationMismatch(k));
        }
        let dinv = edge_matrix(p, tri).try_inverse().ok_or(PlMapError::DegenerateTriangle(k))?;
        let linear = edge_matrix(q, tri) * dinv;
        let offset = q[tri[0]] - linear * p[tri[0]];
        pieces.push(Affine { linear, offset });
    }
    Ok(PLMap { triangulation: t.clone(), domain: p.clone(), image: q.clone(), pieces })
}

impl PLMap {
    /// Lowest-id triangle containing `p`, with barycentric coordinates.
    pub fn locate(&self, p: &Point) -> Option<(usize, [f64; 3])> {
        self.triangulation.triangles().iter().enumerate().find_map(|(k, tri)| {
            let l = barycentric(p, &self.domain[tri[0]], &self.domain[tri[1]], &self.domain[tri[2]]);
            l.iter().all(|&x| x >= -LOCATE_SLACK).then_some((k, l))
        })
    }

    pub fn evaluate(&self, p: &Point) -> Result<Point, PlMapError> {
        let (k, _) = self.locate(p).ok_or(PlMapError::OutsideCarrier(p.x, p.y))?;
        Ok(self.pieces[k].apply(p))
    }

    /// Largest disagreement between the affine pieces of two triangles at their shared vertices.
    pub fn continuity_defect(&self) -> f64 {
        let t = &self.triangulation;
        let mut worst: f64 = 0.0;
        for e in 0..t.edges().len() {
            if let (a, Some(b)) = t.edge_triangles(e) {
                for &v in &t.edges()[e] {
                    let d = (self.pieces[a].apply(&self.domain[v]) - self.pieces[b].apply(&self.domain[v])).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// Singular values `(σ_min, σ_max)` of the linear part of triangle `k`.
    pub fn singular_values(&self, k: usize) -> (f64, f64) {
        let (lo, hi) = crate::structure::sym2_eigenvalues(&(self.pieces[k].linear.transpose() * self.pieces[k].linear));
        (lo.max(0.0).sqrt(), hi.sqrt())
    }

    /// `σ_max / σ_min`; 1 for similarities.
    pub fn dilatation(&self, k: usize) -> f64 {
        let hi = self.singular_values(k).1;
        // σ_min = |det| / σ_max keeps the ratio accurate near 1
        hi * hi / self.pieces[k].linear.determinant().abs()
    }

    pub fn operator_norm(&self, k: usize) -> f64 {
        self.singular_values(k).1
    }

    /// Flat metric of the domain triangle `k` in D-coordinates.
    pub fn domain_metric(&self, k: usize) -> TriangleMetric {
        let tri = self.triangulation.triangles()[k];
        TriangleMetric::from_edges(self.domain[tri[1]] - self.domain[tri[0]], self.domain[tri[2]] - self.domain[tri[0]])
    }

    /// The image metric pulled back to the D-coordinates of the domain triangle `k`.
    pub fn pullback_metric(&self, k: usize) -> TriangleMetric {
        let tri = self.triangulation.triangles()[k];
        TriangleMetric::from_edges(self.image[tri[1]] - self.image[tri[0]], self.image[tri[2]] - self.image[tri[0]])
    }

    /// Breakpoints of the segment `p → q` at triangle edge crossings, as parameters in `[0, 1]`.
    fn crossings(&self, p: &Point, q: &Point) -> Vec<f64> {
        let d = q - p;
        let mut ts = vec![0.0, 1.0];
        for &[a, b] in self.triangulation.edges() {
            let (x, y) = (self.domain[a], self.domain[b]);
            let e = y - x;
            let den = d.x * e.y - d.y * e.x;
            if den == 0.0 {
                continue;
            }
            let w = x - p;
            let t = (w.x * e.y - w.y * e.x) / den;
            let s = (w.x * d.y - w.y * d.x) / den;
            if t > 0.0 && t < 1.0 && (0.0..=1.0).contains(&s) {
                ts.push(t);
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Checks `|φ(p) − φ(q)| ≤ C·|p − q|` along the straight segment, which must stay in the
    /// carrier. Also returns the image length of the segment.
    pub fn path_lipschitz_bound(&self, p: &Point, q: &Point, c: f64) -> Result<PathBound, PlMapError> {
        let ts = self.crossings(p, q);
        let at = |t: f64| p + (q - p) * t;
        let mut image_length = 0.0;
        for w in ts.windows(2) {
            let mid = at(0.5 * (w[0] + w[1]));
            let (k, _) = self.locate(&mid).ok_or(PlMapError::OutsideCarrier(mid.x, mid.y))?;
            image_length += (self.pieces[k].linear * (at(w[1]) - at(w[0]))).norm();
        }
        let image_distance = (self.evaluate(q)? - self.evaluate(p)?).norm();
        let path_length = (q - p).norm();
        let holds = image_distance <= c * path_length * (1.0 + 1e-12) + f64::EPSILON;
        Ok(PathBound { image_distance, image_length, path_length, holds })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathBound {
    pub image_distance: f64,
    pub image_length: f64,
    pub path_length: f64,
    pub holds: bool,
}
