//! Vertex scaling `ℓ_ij = L_ij e^{w_i + w_j}`: discrete curvature and a Newton solver for
//! prescribed curvature on a fixed triangulation.
//!
//! Curvature is the angle defect `K_i = 2π − Σ θ` at interior vertices and `π − Σ θ` at
//! boundary vertices. In terms of the conformal factors of
//! [`ConformalStructure::vertex_scaling`](crate::structure::ConformalStructure::vertex_scaling)
//! the solution is `f = 2w`.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geom::angle_opposite;
use crate::mesh::Triangulation;
use crate::packing::AngleSumReport;
use crate::structure::{triangle_nondegenerate, ConformalFactors, EdgeLengths};

/// Tolerance on the Gauss–Bonnet sum of a curvature target.
pub const GAUSS_BONNET_TOL: f64 = 1e-10;
/// Smallest Newton step fraction tried before giving up.
const MIN_STEP: f64 = 1.0 / (1u64 << 30) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VertexScaleError {
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("no Newton step keeps every triangle nondegenerate (residual {residual:e})")]
    DegenerationBlocked { residual: f64, w: Vec<f64> },
    #[error("no convergence after {steps} Newton steps (residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64, w: Vec<f64> },
    #[error("target curvature sums to {sum}, expected 2πχ = {expected}")]
    GaussBonnet { sum: f64, expected: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
}

/// Per-vertex target angle defect.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTarget {
    pub k: Vec<f64>,
}

impl CurvatureTarget {
    pub fn new(t: &Triangulation, k: Vec<f64>) -> Result<Self, VertexScaleError> {
        if k.len() != t.vertex_count() {
            return Err(VertexScaleError::SizeMismatch(format!("{} targets for {} vertices", k.len(), t.vertex_count())));
        }
        let sum: f64 = k.iter().sum();
        let expected = TAU * t.euler_characteristic() as f64;
        if !((sum - expected).abs() <= GAUSS_BONNET_TOL) {
            return Err(VertexScaleError::GaussBonnet { sum, expected });
        }
        Ok(CurvatureTarget { k })
    }

    /// Zero curvature everywhere on a closed surface of Euler characteristic 0.
    pub fn flat_torus(t: &Triangulation) -> Result<Self, VertexScaleError> {
        Self::new(t, vec![0.0; t.vertex_count()])
    }

    /// A flat Euclidean triangle: straight boundary (`K = 0`) except at three corners
    /// with interior angle `π/3` (`K = 2π/3`).
    pub fn triangle(t: &Triangulation, corners: [usize; 3]) -> Result<Self, VertexScaleError> {
        let mut k = vec![0.0; t.vertex_count()];
        for c in corners {
            if c >= k.len() || !t.is_boundary(c) {
                return Err(VertexScaleError::SizeMismatch(format!("corner {c} is not a boundary vertex")));
            }
            k[c] = PI - PI / 3.0;
        }
        Self::new(t, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlattenResult {
    /// Scaling exponents, normalized so that `Σ w = 0`.
    pub w: Vec<f64>,
    /// Conformal factors `f = 2w`.
    pub factors: ConformalFactors,
    pub lengths: EdgeLengths,
    /// `max |K − K̄|`.
    pub residual: f64,
    pub newton_steps: usize,
}

/// `L_ij e^{w_i + w_j}`.
pub fn scaled_lengths(t: &Triangulation, l: &EdgeLengths, w: &[f64]) -> EdgeLengths {
    EdgeLengths { ell: t.edges().iter().zip(&l.ell).map(|(&[i, j], &x)| x * (w[i] + w[j]).exp()).collect() }
}

/// Interior angles of triangle `k` at its three stored vertices.
fn triangle_angles(t: &Triangulation, l: &EdgeLengths, k: usize) -> Result<[f64; 3], VertexScaleError> {
    let (l01, l02, l12) = l.triangle(t, k);
    if !triangle_nondegenerate(l01, l02, l12).nondegenerate {
        return Err(VertexScaleError::DegenerateTriangle(k));
    }
    Ok([angle_opposite(l12, l01, l02), angle_opposite(l02, l01, l12), angle_opposite(l01, l02, l12)])
}

pub fn curvature(t: &Triangulation, l: &EdgeLengths) -> Result<AngleSumReport, VertexScaleError> {
    let mut sums = vec![0.0; t.vertex_count()];
    for (k, tri) in t.triangles().iter().enumerate() {
        let a = triangle_angles(t, l, k)?;
        for c in 0..3 {
            sums[tri[c]] += a[c];
        }
    }
    Ok(AngleSumReport::from_angle_sums(t, sums))
}

/// `∂K_i/∂w_j`: the cotangent Laplacian, `−(cot α + cot β)` off the diagonal on edges.
pub fn curvature_jacobian(t: &Triangulation, l: &EdgeLengths) -> Result<DMatrix<f64>, VertexScaleError> {
    let n = t.vertex_count();
    let mut j = DMatrix::zeros(n, n);
    for (k, tri) in t.triangles().iter().enumerate() {
        let a = triangle_angles(t, l, k)?;
        for c in 0..3 {
            let (p, q) = (tri[(c + 1) % 3], tri[(c + 2) % 3]);
            let cot = 1.0 / a[c].tan();
            j[(p, q)] -= cot;
            j[(q, p)] -= cot;
            j[(p, p)] += cot;
            j[(q, q)] += cot;
        }
    }
    Ok(j)
}

fn residual(t: &Triangulation, l: &EdgeLengths, w: &[f64], target: &CurvatureTarget) -> Result<(f64, Vec<f64>), VertexScaleError> {
    let k = curvature(t, &scaled_lengths(t, l, w))?.curvature;
    let diff: Vec<f64> = target.k.iter().zip(&k).map(|(a, b)| a - b).collect();
    Ok((diff.iter().fold(0.0, |m, x| m.max(x.abs())), diff))
}

/// Newton's method for `K(w) = K̄` from `w = 0`, halving steps to keep every triangle
/// nondegenerate and the residual decreasing.
pub fn flatten(
    t: &Triangulation,
    l: &EdgeLengths,
    target: &CurvatureTarget,
    tol: f64,
    max_steps: usize,
) -> Result<FlattenResult, VertexScaleError> {
    let n = t.vertex_count();
    if l.ell.len() != t.edges().len() || target.k.len() != n {
        return Err(VertexScaleError::SizeMismatch("lengths or target do not match the triangulation".into()));
    }
    let mut w = vec![0.0; n];
    let (mut res, mut diff) = residual(t, l, &w, target)?;
    let mut steps = 0;
    while res > tol {
        if steps >= max_steps {
            return Err(VertexScaleError::NoConvergence { steps, residual: res, w });
        }
        steps += 1;
        let mut a = curvature_jacobian(t, &scaled_lengths(t, l, &w))?;
        a.add_scalar_mut(1.0);
        let delta = a
            .lu()
            .solve(&DVector::from_vec(diff.clone()))
            .ok_or(VertexScaleError::DegenerationBlocked { residual: res, w: w.clone() })?;
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = w.iter().zip(delta.iter()).map(|(x, d)| x + step * d).collect();
            if let Ok((r, d)) = residual(t, l, &cand, target) {
                if r < res {
                    w = cand;
                    res = r;
                    diff = d;
                    break;
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Err(VertexScaleError::DegenerationBlocked { residual: res, w });
            }
        }
    }
    let mean = w.iter().sum::<f64>() / n as f64;
    w.iter_mut().for_each(|x| *x -= mean);
    let lengths = scaled_lengths(t, l, &w);
    Ok(FlattenResult {
        factors: ConformalFactors { f: w.iter().map(|x| 2.0 * x).collect() },
        w,
        lengths,
        residual: res,
        newton_steps: steps,
    })
}

/// Largest `|J − J_fd| / max(|J|, 1)` over all entries, with `J_fd` from central
/// differences of step `h` in each `w_j`.
pub fn curvature_gradient_check(t: &Triangulation, l: &EdgeLengths, w: &[f64], h: f64) -> Result<f64, VertexScaleError> {
    let j = curvature_jacobian(t, &scaled_lengths(t, l, w))?;
    let jmax = j.amax().max(1.0);
    let mut worst: f64 = 0.0;
    let mut probe = w.to_vec();
    for c in 0..t.vertex_count() {
        probe[c] = w[c] + h;
        let kp = curvature(t, &scaled_lengths(t, l, &probe))?.curvature;
        probe[c] = w[c] - h;
        let km = curvature(t, &scaled_lengths(t, l, &probe))?.curvature;
        probe[c] = w[c];
        for r in 0..t.vertex_count() {
            let fd = (kp[r] - km[r]) / (2.0 * h);
            worst = worst.max((j[(r, c)] - fd).abs() / jmax);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_triangulation, equilateral_torus};

    #[test]
    fn single_equilateral_triangle() {
        let t = build_triangulation(&[[0, 1, 2]]).unwrap();
        let k = curvature(&t, &EdgeLengths { ell: vec![1.0; 3] }).unwrap();
        for x in k.curvature {
            assert!((x - 2.0 * PI / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_torus_is_fixed() {
        let tor = equilateral_torus(4, 4).unwrap();
        let t = &tor.triangulation;
        let l = EdgeLengths { ell: tor.lengths.clone() };
        let r = flatten(t, &l, &CurvatureTarget::flat_torus(t).unwrap(), 1e-10, 20).unwrap();
        assert!(r.newton_steps <= 1);
        assert!(r.w.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn jacobian_rows_sum_to_zero_and_match_differences() {
        let tor = equilateral_torus(3, 4).unwrap();
        let t = &tor.triangulation;
        let l = EdgeLengths { ell: tor.lengths.clone() };
        let j = curvature_jacobian(t, &l).unwrap();
        for r in 0..t.vertex_count() {
            assert!(j.row(r).sum().abs() < 1e-12);
        }
        assert!((&j - j.transpose()).amax() < 1e-12);
        assert!(curvature_gradient_check(t, &l, &vec![0.0; t.vertex_count()], 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn target_rejects_wrong_total() {
        let t = build_triangulation(&[[0, 1, 2]]).unwrap();
        assert!(matches!(CurvatureTarget::new(&t, vec![0.0; 3]), Err(VertexScaleError::GaussBonnet { .. })));
        assert!(CurvatureTarget::triangle(&t, [0, 1, 2]).is_ok());
    }
}
