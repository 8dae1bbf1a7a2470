//! Angles of triangles formed by three mutually tangent circles.

use std::f64::consts::PI;

/// Angle at the circle of radius `r0` in the Euclidean triangle of centers.
pub fn euclidean_angle(r0: f64, r1: f64, r2: f64) -> f64 {
    2.0 * (r1 * r2).sqrt().atan2((r0 * (r0 + r1 + r2)).sqrt())
}

/// Angle at the circle with `s0` in the hyperbolic triangle of centers, radii stored as
/// `s = e^{-r}` (`s = 0` is a horocycle).
pub fn hyperbolic_angle(s0: f64, s1: f64, s2: f64) -> f64 {
    let num = s0 * ((1.0 - s1 * s1) * (1.0 - s2 * s2)).sqrt();
    let den = ((1.0 - s0 * s0) * (1.0 - s0 * s0 * s1 * s1 * s2 * s2)).sqrt();
    2.0 * num.atan2(den)
}

/// Euclidean uniform-neighbor update: the radius at which `k` equal petals, matching the
/// current angle sum `theta`, would close up exactly.
pub fn euclidean_update(r: f64, theta: f64, k: usize) -> f64 {
    let beta = (theta / (2.0 * k as f64)).sin();
    let rho = r * beta / (1.0 - beta);
    let delta = (PI / k as f64).sin();
    rho * (1.0 - delta) / delta
}

/// Hyperbolic uniform-neighbor update in `s` coordinates.
pub fn hyperbolic_update(s0: f64, theta: f64, k: usize) -> f64 {
    let beta = (theta / (2.0 * k as f64)).sin();
    let x = ((s0 - beta) / (s0 * (1.0 - beta * s0))).clamp(0.0, 1.0);
    let delta = (PI / k as f64).sin();
    let a = 1.0 - x;
    2.0 * delta / (a + (a * a + 4.0 * delta * delta * x).sqrt())
}
