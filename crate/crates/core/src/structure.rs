//! Discrete conformal structures `C_{α,η}` and the metric algebra of a single triangle.
//!
//! Edge lengths come from per-vertex conformal factors `f` through
//! `ℓ_ij² = α_i e^{2f_i} + α_j e^{2f_j} + 2η_ij e^{f_i+f_j}`. Circle packing is
//! `α ≡ 1, η ≡ 1` (then `ℓ_ij = r_i + r_j` with `r = e^f`), vertex scaling is
//! `α ≡ 0, η = L²/2` (then `ℓ_ij = L_ij e^{(f_i+f_j)/2}`).

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::geom::heron_area;
use crate::mesh::Triangulation;

/// Relative slack below which a triangle counts as degenerate.
pub const NONDEGENERACY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("squared length {value} on edge {edge} is not positive")]
    NonPositiveSquaredLength { edge: usize, value: f64 },
    #[error("edge length {length} exceeds eps = {eps}")]
    EdgeExceedsEps { length: f64, eps: f64 },
    #[error("degenerate triangle ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalStructure {
    /// Per-vertex α.
    pub alpha: Vec<f64>,
    /// Per-edge η in canonical edge order.
    pub eta: Vec<f64>,
}

impl ConformalStructure {
    pub fn circle_packing(t: &Triangulation) -> Self {
        ConformalStructure { alpha: vec![1.0; t.vertex_count()], eta: vec![1.0; t.edges().len()] }
    }

    /// The vertex scaling structure of base lengths `l`.
    pub fn vertex_scaling(t: &Triangulation, l: &EdgeLengths) -> Self {
        ConformalStructure { alpha: vec![0.0; t.vertex_count()], eta: l.ell.iter().map(|x| 0.5 * x * x).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactors {
    pub f: Vec<f64>,
}

impl ConformalFactors {
    pub fn zeros(n: usize) -> Self {
        ConformalFactors { f: vec![0.0; n] }
    }

    /// Circle packing factors `f = ln r`.
    pub fn from_radii(r: &[f64]) -> Self {
        ConformalFactors { f: r.iter().map(|x| x.ln()).collect() }
    }

    pub fn shifted(&self, c: f64) -> Self {
        ConformalFactors { f: self.f.iter().map(|x| x + c).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLengths {
    /// Per-edge length in canonical edge order.
    pub ell: Vec<f64>,
}

impl EdgeLengths {
    /// Lengths of triangle `k` as `(ℓ01, ℓ02, ℓ12)` in its stored vertex order.
    pub fn triangle(&self, t: &Triangulation, k: usize) -> (f64, f64, f64) {
        let [a, b, c] = t.triangles()[k];
        let e = |x, y| self.ell[t.edge_id(x, y).expect("triangle edge")];
        (e(a, b), e(a, c), e(b, c))
    }
}

pub fn edge_lengths(
    s: &ConformalStructure,
    f: &ConformalFactors,
    t: &Triangulation,
) -> Result<EdgeLengths, StructureError> {
    if s.alpha.len() != t.vertex_count() || f.f.len() != t.vertex_count() || s.eta.len() != t.edges().len() {
        return Err(StructureError::SizeMismatch(format!(
            "{} vertices / {} edges vs alpha {}, f {}, eta {}",
            t.vertex_count(),
            t.edges().len(),
            s.alpha.len(),
            f.f.len(),
            s.eta.len()
        )));
    }
    let ell = t
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[i, j])| {
            let (fi, fj) = (f.f[i], f.f[j]);
            let q = s.alpha[i] * (2.0 * fi).exp() + s.alpha[j] * (2.0 * fj).exp() + 2.0 * s.eta[e] * (fi + fj).exp();
            if q > 0.0 && q.is_finite() {
                Ok(q.sqrt())
            } else {
                Err(StructureError::NonPositiveSquaredLength { edge: e, value: q })
            }
        })
        .collect::<Result<Vec<f64>, StructureError>>()?;
    Ok(EdgeLengths { ell })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    /// Smallest slack among the three triangle inequalities.
    pub margin: f64,
}

pub fn triangle_nondegenerate(l01: f64, l02: f64, l12: f64) -> Nondegeneracy {
    let margin = (l01 + l02 - l12).min(l01 + l12 - l02).min(l02 + l12 - l01);
    let scale = l01.max(l02).max(l12);
    Nondegeneracy { nondegenerate: margin > NONDEGENERACY_MARGIN * scale, margin }
}

/// `ϑ = 2·Area/ε²`; the triangle is `(ϑ₀, ε)`-full iff the returned value is at least `ϑ₀`.
pub fn fullness(l01: f64, l02: f64, l12: f64, eps: f64) -> Result<f64, StructureError> {
    let longest = l01.max(l02).max(l12);
    if longest > eps {
        return Err(StructureError::EdgeExceedsEps { length: longest, eps });
    }
    Ok(2.0 * heron_area(l01, l02, l12) / (eps * eps))
}

/// The flat metric of a triangle in unit-simplex coordinates `(λ¹, λ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMetric {
    pub gd: Matrix2<f64>,
    pub area: f64,
}

impl TriangleMetric {
    /// Gram matrix of the edge vectors `p1 - p0`, `p2 - p0` of a planar triangle.
    pub fn from_edges(e1: Vector2<f64>, e2: Vector2<f64>) -> Self {
        let off = e1.dot(&e2);
        TriangleMetric {
            gd: Matrix2::new(e1.norm_squared(), off, off, e2.norm_squared()),
            area: 0.5 * (e1.x * e2.y - e1.y * e2.x).abs(),
        }
    }

    /// `|v|²` for a tangent vector in D-coordinates.
    pub fn norm_sq(&self, v: &Vector2<f64>) -> f64 {
        v.dot(&(self.gd * v))
    }

    /// Eigenvalues `(λ_min, λ_max)` of the symmetric matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        sym2_eigenvalues(&self.gd)
    }
}

pub(crate) fn sym2_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let hi = mean + rad;
    // product form keeps the small eigenvalue accurate
    let lo = if hi != 0.0 { (a * c - b * b) / hi } else { mean - rad };
    (lo, hi)
}

pub fn triangle_metric(l01: f64, l02: f64, l12: f64) -> Result<TriangleMetric, StructureError> {
    if !triangle_nondegenerate(l01, l02, l12).nondegenerate {
        return Err(StructureError::DegenerateTriangle(l01, l02, l12));
    }
    let (a, b) = (l01 * l01, l02 * l02);
    let off = 0.5 * (a + b - l12 * l12);
    Ok(TriangleMetric { gd: Matrix2::new(a, off, off, b), area: heron_area(l01, l02, l12) })
}

/// `⟨v, w⟩ = -½ Σ ℓ_ij² v^i w^j` for barycentric tangent vectors (components summing to 0).
pub fn delta_inner_product(l01: f64, l02: f64, l12: f64, v: [f64; 3], w: [f64; 3]) -> f64 {
    let l2 = [[0.0, l01 * l01, l02 * l02], [l01 * l01, 0.0, l12 * l12], [l02 * l02, l12 * l12, 0.0]];
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += l2[i][j] * v[i] * w[j];
        }
    }
    -0.5 * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Lower bound on `√λ`.
    pub lower: f64,
    /// Upper bound on `√λ`.
    pub upper: f64,
    pub pass: bool,
}

/// Checks `ϑ ε n^{1−n} ≤ √λ ≤ ε n` with `n = 2` for both eigenvalues of `gD`.
pub fn eigenvalue_bounds_check(m: &TriangleMetric, theta: f64, eps: f64) -> EigenReport {
    let (lambda_min, lambda_max) = m.eigenvalues();
    let lower = theta * eps / 2.0;
    let upper = 2.0 * eps;
    let pass = lambda_min > 0.0 && lambda_min.sqrt() >= lower && lambda_max.sqrt() <= upper;
    EigenReport { lambda_min, lambda_max, lower, upper, pass }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    /// Smallest μ with `|g_ij − ḡ_ij| ≤ μ λ_min(g) / n`.
    pub mu: f64,
    /// `|(g − ḡ)(v, v)|`.
    pub lhs: f64,
    /// `μ |v|²_g`.
    pub rhs: f64,
    pub pass: bool,
}

/// Evaluates the perturbation bound `|(g−ḡ)(v,v)| ≤ μ|v|²_g` for positive definite `g`.
pub fn perturbation_check(g: &Matrix2<f64>, gbar: &Matrix2<f64>, v: &Vector2<f64>) -> PerturbationReport {
    let d = g - gbar;
    let (lmin, _) = sym2_eigenvalues(g);
    let mu = 2.0 * d.amax() / lmin;
    let lhs = v.dot(&(d * v)).abs();
    let rhs = mu * v.dot(&(g * v));
    PerturbationReport { mu, lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-12) }
}
