//! Karcher means and Riemannian barycentric maps on three model surfaces.
//!
//! For points `p_i` and weights `λ`, the Karcher mean is the zero of
//! `F(a) = Σ λ^i exp_a^{-1}(p_i)`, found by the fixed-point iteration `a ← exp_a(step·F(a))`.
//! The barycentric map `Ψ` sends each `λ` in the standard simplex to that mean.

use std::sync::Arc;

use nalgebra::{Matrix2, SVector, Vector2, Vector3};
use thiserror::Error;

use crate::structure::triangle_metric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BarycentricError {
    #[error("point leaves the working region")]
    OutOfWorkingRegion,
    #[error("points are antipodal or too far apart for a unique geodesic")]
    ConjugateLocus,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("points do not fit in a convex ball")]
    PointsTooSpread,
    #[error("finite-difference error {fd_error:e} dominates the deviation {deviation:e}")]
    GridTooCoarse { fd_error: f64, deviation: f64 },
    #[error("invalid barycentric weights: {0}")]
    BadWeights(String),
}

/// A model Riemannian surface with exponential and logarithm maps in `D` ambient coordinates.
pub trait ModelSurface<const D: usize> {
    fn exp(&self, a: &SVector<f64, D>, v: &SVector<f64, D>) -> Result<SVector<f64, D>, BarycentricError>;
    fn log(&self, a: &SVector<f64, D>, p: &SVector<f64, D>) -> Result<SVector<f64, D>, BarycentricError>;
    /// `g_a(v, w)`.
    fn inner(&self, a: &SVector<f64, D>, v: &SVector<f64, D>, w: &SVector<f64, D>) -> f64;
    /// Bound on the absolute sectional curvature.
    fn c0(&self) -> f64;
    /// Rejects point sets too spread out for a unique mean.
    fn check_spread(&self, _points: &[SVector<f64, D>]) -> Result<(), BarycentricError> {
        Ok(())
    }

    fn distance(&self, a: &SVector<f64, D>, b: &SVector<f64, D>) -> Result<f64, BarycentricError> {
        let v = self.log(a, b)?;
        Ok(self.inner(a, &v, &v).sqrt())
    }
}

/// The Euclidean plane.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Plane;

impl ModelSurface<2> for Plane {
    fn exp(&self, a: &Vector2<f64>, v: &Vector2<f64>) -> Result<Vector2<f64>, BarycentricError> {
        Ok(a + v)
    }
    fn log(&self, a: &Vector2<f64>, p: &Vector2<f64>) -> Result<Vector2<f64>, BarycentricError> {
        Ok(p - a)
    }
    fn inner(&self, _a: &Vector2<f64>, v: &Vector2<f64>, w: &Vector2<f64>) -> f64 {
        v.dot(w)
    }
    fn c0(&self) -> f64 {
        0.0
    }
}

/// The round sphere of radius `rho` about the origin of `R³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub rho: f64,
}

impl Sphere {
    /// Points are treated as on the sphere when `||p| − ρ| ≤ 1e-12 ρ`.
    fn on_sphere(&self, p: &Vector3<f64>) -> bool {
        (p.norm() - self.rho).abs() <= 1e-12 * self.rho
    }
}

impl ModelSurface<3> for Sphere {
    fn exp(&self, a: &Vector3<f64>, v: &Vector3<f64>) -> Result<Vector3<f64>, BarycentricError> {
        if !self.on_sphere(a) {
            return Err(BarycentricError::OutOfWorkingRegion);
        }
        let t = v.norm();
        if t == 0.0 {
            return Ok(*a);
        }
        let ang = t / self.rho;
        Ok(a * ang.cos() + v * (self.rho * ang.sin() / t))
    }

    fn log(&self, a: &Vector3<f64>, p: &Vector3<f64>) -> Result<Vector3<f64>, BarycentricError> {
        if !self.on_sphere(a) || !self.on_sphere(p) {
            return Err(BarycentricError::OutOfWorkingRegion);
        }
        let r2 = self.rho * self.rho;
        let ang = a.cross(p).norm().atan2(a.dot(p));
        if ang >= std::f64::consts::PI * (1.0 - 1e-9) {
            return Err(BarycentricError::ConjugateLocus);
        }
        let perp = p - a * (a.dot(p) / r2);
        let n = perp.norm();
        if n == 0.0 {
            return Ok(Vector3::zeros());
        }
        Ok(perp * (self.rho * ang / n))
    }

    fn inner(&self, _a: &Vector3<f64>, v: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
        v.dot(w)
    }

    fn c0(&self) -> f64 {
        1.0 / (self.rho * self.rho)
    }

    /// All points must lie within `πρ/4` of their normalized centroid.
    fn check_spread(&self, points: &[Vector3<f64>]) -> Result<(), BarycentricError> {
        let sum: Vector3<f64> = points.iter().sum();
        if sum.norm() == 0.0 {
            return Err(BarycentricError::PointsTooSpread);
        }
        let c = sum * (self.rho / sum.norm());
        for p in points {
            if self.distance(&c, p)? >= std::f64::consts::FRAC_PI_4 * self.rho {
                return Err(BarycentricError::PointsTooSpread);
            }
        }
        Ok(())
    }
}

type Scalar2 = Arc<dyn Fn(&Vector2<f64>) -> f64 + Send + Sync>;
type Vector2Fn = Arc<dyn Fn(&Vector2<f64>) -> Vector2<f64> + Send + Sync>;

/// The plane with metric `e^{2u(z)}|dz|²` on the disk `|z − center| < radius`. The caller
/// supplies `u`, its gradient and the curvature bounds `C₀`, `C₁` valid on that region.
#[derive(Clone)]
pub struct ConformallyFlat {
    pub u: Scalar2,
    pub grad_u: Vector2Fn,
    pub center: Vector2<f64>,
    pub radius: f64,
    pub c0: f64,
    pub c1: f64,
}

impl std::fmt::Debug for ConformallyFlat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformallyFlat")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .finish_non_exhaustive()
    }
}

/// Relative tolerance of the geodesic integrator and the shooting method.
pub const GEODESIC_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: u32 = 16;
const MAX_SHOOTING: usize = 50;

impl ConformallyFlat {
    /// `u ≡ 0`, the flat metric.
    pub fn flat(center: Vector2<f64>, radius: f64) -> Self {
        ConformallyFlat {
            u: Arc::new(|_| 0.0),
            grad_u: Arc::new(|_| Vector2::zeros()),
            center,
            radius,
            c0: 0.0,
            c1: 0.0,
        }
    }

    fn inside(&self, z: &Vector2<f64>) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// `z'' = |z'|²∇u − 2(∇u·z')z'`.
    fn accel(&self, z: &Vector2<f64>, v: &Vector2<f64>) -> Vector2<f64> {
        let g = (self.grad_u)(z);
        g * v.norm_squared() - v * (2.0 * g.dot(v))
    }

    /// Runge–Kutta–Nyström integration of the geodesic over `t ∈ [0, 1]` in `n` steps.
    fn shoot(&self, a: &Vector2<f64>, v: &Vector2<f64>, n: usize) -> Result<Vector2<f64>, BarycentricError> {
        let h = 1.0 / n as f64;
        let (mut y, mut yp) = (*a, *v);
        for _ in 0..n {
            let k1 = self.accel(&y, &yp);
            let mid = y + yp * (0.5 * h) + k1 * (h * h / 8.0);
            let k2 = self.accel(&mid, &(yp + k1 * (0.5 * h)));
            let k3 = self.accel(&mid, &(yp + k2 * (0.5 * h)));
            let end = y + yp * h + k3 * (0.5 * h * h);
            let k4 = self.accel(&end, &(yp + k3 * h));
            y = y + yp * h + (k1 + k2 + k3) * (h * h / 6.0);
            yp += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if !self.inside(&y) || !self.inside(&mid) {
                return Err(BarycentricError::OutOfWorkingRegion);
            }
        }
        Ok(y)
    }
}

impl ModelSurface<2> for ConformallyFlat {
    /// Doubles the step count until two successive results agree to `GEODESIC_TOL·|v|`, or to
    /// a few ulps of the endpoint for very short `v`, and returns the coarser one.
    fn exp(&self, a: &Vector2<f64>, v: &Vector2<f64>) -> Result<Vector2<f64>, BarycentricError> {
        if !self.inside(a) {
            return Err(BarycentricError::OutOfWorkingRegion);
        }
        let tol = (GEODESIC_TOL * v.norm()).max(4.0 * f64::EPSILON * (a.norm() + v.norm()));
        let mut n = 1;
        let mut coarse = self.shoot(a, v, n)?;
        for _ in 0..MAX_DOUBLINGS {
            let fine = self.shoot(a, v, 2 * n)?;
            if (fine - coarse).norm() <= tol {
                return Ok(coarse);
            }
            coarse = fine;
            n *= 2;
        }
        Err(BarycentricError::NoConvergence { iterations: n, residual: f64::NAN })
    }

    /// Newton shooting from the initial guess `p − a`, with a finite-difference Jacobian.
    fn log(&self, a: &Vector2<f64>, p: &Vector2<f64>) -> Result<Vector2<f64>, BarycentricError> {
        if !self.inside(a) || !self.inside(p) {
            return Err(BarycentricError::OutOfWorkingRegion);
        }
        let mut v = p - a;
        let scale = v.norm();
        if scale == 0.0 {
            return Ok(v);
        }
        let ulp = f64::EPSILON * (a.norm() + p.norm());
        let mut r = self.exp(a, &v)? - p;
        for _ in 0..MAX_SHOOTING {
            if r.norm() <= ulp || r.norm() <= 10.0 * GEODESIC_TOL * scale {
                return Ok(v);
            }
            let d = 1e-7 * scale;
            let c0 = (self.exp(a, &(v + Vector2::new(d, 0.0)))? - self.exp(a, &(v - Vector2::new(d, 0.0)))?) / (2.0 * d);
            let c1 = (self.exp(a, &(v + Vector2::new(0.0, d)))? - self.exp(a, &(v - Vector2::new(0.0, d)))?) / (2.0 * d);
            let j = Matrix2::from_columns(&[c0, c1]);
            let step = j.try_inverse().ok_or(BarycentricError::ConjugateLocus)? * r;
            v -= step;
            r = self.exp(a, &v)? - p;
        }
        Err(BarycentricError::NoConvergence { iterations: MAX_SHOOTING, residual: r.norm() })
    }

    fn inner(&self, a: &Vector2<f64>, v: &Vector2<f64>, w: &Vector2<f64>) -> f64 {
        (2.0 * (self.u)(a)).exp() * v.dot(w)
    }

    fn c0(&self) -> f64 {
        self.c0
    }
}

/// Weights on the standard simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricPoint {
    pub lambda: Vec<f64>,
}

impl BarycentricPoint {
    pub fn new(lambda: Vec<f64>) -> Result<Self, BarycentricError> {
        let sum: f64 = lambda.iter().sum();
        if lambda.is_empty() || (sum - 1.0).abs() > 1e-14 || lambda.iter().any(|&x| !(x >= 0.0)) {
            return Err(BarycentricError::BadWeights(format!("{lambda:?}")));
        }
        Ok(BarycentricPoint { lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KarcherConfig {
    /// Bound on `|F(a)|_g`, in length units.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step_size: f64,
}

impl Default for KarcherConfig {
    fn default() -> Self {
        KarcherConfig { tolerance: 1e-13, max_iterations: 200, step_size: 1.0 }
    }
}

fn weighted_log<const D: usize, S: ModelSurface<D>>(
    s: &S,
    a: &SVector<f64, D>,
    points: &[SVector<f64, D>],
    lambda: &[f64],
) -> Result<SVector<f64, D>, BarycentricError> {
    let mut f = SVector::<f64, D>::zeros();
    for (p, &l) in points.iter().zip(lambda) {
        if l != 0.0 {
            f += s.log(a, p)? * l;
        }
    }
    Ok(f)
}

/// The Karcher mean, starting from the point of largest weight (lowest index on ties).
/// Points with zero weight are never touched.
pub fn karcher_mean<const D: usize, S: ModelSurface<D>>(
    s: &S,
    points: &[SVector<f64, D>],
    lambda: &BarycentricPoint,
    cfg: &KarcherConfig,
) -> Result<SVector<f64, D>, BarycentricError> {
    let w = &lambda.lambda;
    if w.len() != points.len() {
        return Err(BarycentricError::BadWeights(format!("{} weights for {} points", w.len(), points.len())));
    }
    let active: Vec<SVector<f64, D>> = points.iter().zip(w).filter(|(_, &l)| l != 0.0).map(|(p, _)| *p).collect();
    s.check_spread(&active)?;
    let start = (0..w.len()).fold(0, |b, i| if w[i] > w[b] { i } else { b });
    let mut a = points[start];
    let mut f = weighted_log(s, &a, points, w)?;
    let mut res = s.inner(&a, &f, &f).sqrt();
    let mut step = cfg.step_size;
    for _ in 0..cfg.max_iterations {
        if res <= cfg.tolerance {
            return Ok(a);
        }
        let cand = s.exp(&a, &(f * step))?;
        let fc = weighted_log(s, &cand, points, w)?;
        let rc = s.inner(&cand, &fc, &fc).sqrt();
        if rc < res || step < 1e-6 {
            a = cand;
            f = fc;
            res = rc;
            step = cfg.step_size;
        } else {
            step *= 0.5;
        }
    }
    if res <= cfg.tolerance {
        return Ok(a);
    }
    Err(BarycentricError::NoConvergence { iterations: cfg.max_iterations, residual: res })
}

/// `Ψ` on the grid `λ = ((N − i − j)/N, i/N, j/N)`, listed with `j` outer and `i` inner.
pub fn psi_map<const D: usize, S: ModelSurface<D>>(
    s: &S,
    points: &[SVector<f64, D>; 3],
    grid: usize,
    cfg: &KarcherConfig,
) -> Result<Vec<([f64; 3], SVector<f64, D>)>, BarycentricError> {
    let n = grid as f64;
    let mut out = Vec::new();
    for j in 0..=grid {
        for i in 0..=grid - j {
            let lam = [(grid - i - j) as f64 / n, i as f64 / n, j as f64 / n];
            let a = karcher_mean(s, points, &BarycentricPoint { lambda: lam.to_vec() }, cfg)?;
            out.push((lam, a));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackReport {
    /// Longest geodesic edge.
    pub eps: f64,
    /// `max |(Ψ*g − g^Δ)(v, w)| / (|v|_{g^Δ}|w|_{g^Δ})` over interior grid nodes.
    pub max_dev: f64,
    /// `max_dev / ε²`.
    pub beta: f64,
    /// Richardson estimate of the finite-difference error in `max_dev`.
    pub fd_error: f64,
}

/// Floor below which finite-difference error is treated as rounding noise.
pub const FD_NOISE_FLOOR: f64 = 1e-8;

/// Compares `Ψ*g`, from central differences of step `h` in D-coordinates, with the flat
/// metric `g^Δ` of the triangle whose edge lengths are the geodesic distances.
pub fn pullback_estimate<const D: usize, S: ModelSurface<D>>(
    s: &S,
    points: &[SVector<f64, D>; 3],
    grid: usize,
    h: f64,
    cfg: &KarcherConfig,
) -> Result<PullbackReport, BarycentricError> {
    if grid < 3 || h <= 0.0 || h > 0.5 / grid as f64 {
        return Err(BarycentricError::BadWeights(format!("grid {grid} with step {h}")));
    }
    let d01 = s.distance(&points[0], &points[1])?;
    let d02 = s.distance(&points[0], &points[2])?;
    let d12 = s.distance(&points[1], &points[2])?;
    let eps = d01.max(d02).max(d12);
    let gd = triangle_metric(d01, d02, d12).map_err(|_| BarycentricError::PointsTooSpread)?.gd;
    let gd_inv_sqrt = inverse_sqrt(&gd);

    let psi = |l1: f64, l2: f64| {
        karcher_mean(s, points, &BarycentricPoint { lambda: vec![1.0 - l1 - l2, l1, l2] }, cfg)
    };
    let pull = |l1: f64, l2: f64, h: f64| -> Result<Matrix2<f64>, BarycentricError> {
        let a = psi(l1, l2)?;
        let d1 = (psi(l1 + h, l2)? - psi(l1 - h, l2)?) / (2.0 * h);
        let d2 = (psi(l1, l2 + h)? - psi(l1, l2 - h)?) / (2.0 * h);
        let (g11, g12, g22) = (s.inner(&a, &d1, &d1), s.inner(&a, &d1, &d2), s.inner(&a, &d2, &d2));
        Ok(Matrix2::new(g11, g12, g12, g22))
    };
    let rel = |m: &Matrix2<f64>| {
        let (lo, hi) = crate::structure::sym2_eigenvalues(&(gd_inv_sqrt * (m - gd) * gd_inv_sqrt));
        lo.abs().max(hi.abs())
    };

    let n = grid as f64;
    let (mut max_dev, mut fd_error): (f64, f64) = (0.0, 0.0);
    for j in 1..grid {
        for i in 1..grid - j {
            let (l1, l2) = (i as f64 / n, j as f64 / n);
            let coarse = pull(l1, l2, h)?;
            let fine = pull(l1, l2, 0.5 * h)?;
            max_dev = max_dev.max(rel(&fine));
            // central differences are second order: error of `fine` ≈ (fine − coarse)/3
            fd_error = fd_error.max(rel(&(gd + (fine - coarse) / 3.0)));
        }
    }
    if fd_error > FD_NOISE_FLOOR && fd_error > 0.1 * max_dev {
        return Err(BarycentricError::GridTooCoarse { fd_error, deviation: max_dev });
    }
    Ok(PullbackReport { eps, max_dev, beta: max_dev / (eps * eps), fd_error })
}

fn inverse_sqrt(m: &Matrix2<f64>) -> Matrix2<f64> {
    let e = m.symmetric_eigen();
    let d = Matrix2::from_diagonal(&e.eigenvalues.map(|x| 1.0 / x.sqrt()));
    e.eigenvectors * d * e.eigenvectors.transpose()
}
