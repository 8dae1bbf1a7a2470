//! Möbius transformations and least-squares fitting of unit-disk automorphisms.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::geom::{circumcircle, Point};

pub fn to_c(p: &Point) -> Complex64 {
    Complex64::new(p.x, p.y)
}

pub fn to_p(z: Complex64) -> Point {
    Point::new(z.re, z.im)
}

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn compose(&self, inner: &Mobius) -> Self {
        Mobius {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    /// The map sending `(z1, z2, z3)` to `(0, 1, ∞)`.
    fn normalizing(z: [Complex64; 3]) -> Self {
        let [z1, z2, z3] = z;
        Mobius { a: z2 - z3, b: -z1 * (z2 - z3), c: z2 - z1, d: -z3 * (z2 - z1) }
    }

    /// The unique map with `z[i] ↦ w[i]`; the points in each triple must be distinct.
    pub fn from_three_points(z: [Complex64; 3], w: [Complex64; 3]) -> Self {
        Mobius::normalizing(w).inverse().compose(&Mobius::normalizing(z))
    }

    /// Image of a circle (center, radius) that does not pass through the pole.
    pub fn map_circle(&self, center: &Point, radius: f64) -> (Point, f64) {
        let pts: Vec<Point> = (0..3)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 3.0;
                to_p(self.apply(to_c(&(center + Point::new(t.cos(), t.sin()) * radius))))
            })
            .collect();
        circumcircle(&pts[0], &pts[1], &pts[2]).expect("image of a circle is a circle")
    }
}

/// `z ↦ e^{iθ} (z − a) / (1 − ā z)` with `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism {
    pub theta: f64,
    pub a: Complex64,
}

impl DiskAutomorphism {
    pub fn identity() -> Self {
        DiskAutomorphism { theta: 0.0, a: Complex64::new(0.0, 0.0) }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        to_p(self.apply(to_c(p)))
    }

    /// Values and partial derivatives with respect to `(θ, Re a, Im a)`.
    fn jet(&self, z: Complex64) -> (Complex64, [Complex64; 3]) {
        let rot = Complex64::from_polar(1.0, self.theta);
        let n = z - self.a;
        let d = 1.0 - self.a.conj() * z;
        let f = rot * n / d;
        let i = Complex64::i();
        let dx = rot * (-d + n * z) / (d * d);
        let dy = rot * (-i) * (d + n * z) / (d * d);
        (f, [i * f, dx, dy])
    }
}

/// Result of [`fit_disk_automorphism`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusFit {
    pub map: DiskAutomorphism,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Largest pointwise residual.
    pub max: f64,
    pub iterations: usize,
}

/// Least-squares fit of a disk automorphism `M` with `M(src[i]) ≈ dst[i]`, by damped
/// Gauss–Newton from `init`.
pub fn fit_disk_automorphism(src: &[Point], dst: &[Point], init: DiskAutomorphism) -> MobiusFit {
    assert_eq!(src.len(), dst.len());
    let zs: Vec<Complex64> = src.iter().map(to_c).collect();
    let ws: Vec<Complex64> = dst.iter().map(to_c).collect();
    let cost = |m: &DiskAutomorphism| zs.iter().zip(&ws).map(|(z, w)| (m.apply(*z) - w).norm_sqr()).sum::<f64>();
    let mut m = init;
    let mut c = cost(&m);
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 0..200 {
        iterations = it + 1;
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (z, w) in zs.iter().zip(&ws) {
            let (f, d) = m.jet(*z);
            let r = f - w;
            for (comp_r, comps) in [(r.re, [d[0].re, d[1].re, d[2].re]), (r.im, [d[0].im, d[1].im, d[2].im])] {
                let g = Vector3::from(comps);
                jtj += g * g.transpose();
                jtr += g * comp_r;
            }
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut lhs = jtj;
            for k in 0..3 {
                lhs[(k, k)] += mu * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = lhs.lu().solve(&(-jtr)) else {
                mu *= 10.0;
                continue;
            };
            let cand = DiskAutomorphism { theta: m.theta + step[0], a: m.a + Complex64::new(step[1], step[2]) };
            let cc = if cand.a.norm() < 1.0 { cost(&cand) } else { f64::INFINITY };
            if cc <= c {
                let rel = (c - cc) / c.max(1e-300);
                m = cand;
                c = cc;
                mu = (mu * 0.3).max(1e-12);
                improved = rel > 1e-15 && step.amax() > 1e-15;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    m.theta = m.theta.rem_euclid(std::f64::consts::TAU);
    let max = zs.iter().zip(&ws).map(|(z, w)| (m.apply(*z) - w).norm()).fold(0.0, f64::max);
    let rms = if zs.is_empty() { 0.0 } else { (c / zs.len() as f64).sqrt() };
    MobiusFit { map: m, rms, max, iterations }
}
