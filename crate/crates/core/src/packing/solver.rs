//! Uniform-neighbor iteration with superstep acceleration.

use std::f64::consts::TAU;

use super::angles::{euclidean_update, hyperbolic_update};
use super::{LabelGeometry, PackingError, PackingLabel, SolverConfig};
use crate::mesh::{rotate_to, Triangulation};

/// Neutral starting value of `s = e^{-r}` for free hyperbolic circles.
const HYPERBOLIC_START: f64 = 0.5;
/// Largest extrapolation factor tried by a superstep.
const MAX_SUPERSTEP: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub sweeps: usize,
    pub supersteps: usize,
    /// Final `max |2π − angle sum|` over the free vertices.
    pub residual: f64,
}

/// Packing with prescribed radii on the boundary, listed in `t.boundary_vertices()` order.
pub fn solve_euclidean(
    t: &Triangulation,
    boundary_radii: &[f64],
    cfg: &SolverConfig,
) -> Result<(PackingLabel, SolveStats), PackingError> {
    let boundary = t.boundary_vertices();
    if boundary.is_empty() {
        return Err(PackingError::NotADisk);
    }
    if boundary_radii.len() != boundary.len() || boundary_radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(PackingError::BadInput("boundary radii must be positive, one per boundary vertex".into()));
    }
    let mean = boundary_radii.iter().sum::<f64>() / boundary_radii.len() as f64;
    let mut values = initial(t, cfg, mean)?;
    for (&v, &r) in boundary.iter().zip(boundary_radii) {
        values[v] = r;
    }
    let mut label = PackingLabel::euclidean(values);
    let stats = iterate(t, &mut label, cfg)?;
    Ok((label, stats))
}

/// The maximal packing: every boundary circle a horocycle, interior angle sums `2π`.
pub fn solve_maximal_hyperbolic(
    t: &Triangulation,
    cfg: &SolverConfig,
) -> Result<(PackingLabel, SolveStats), PackingError> {
    if !t.is_disk() {
        return Err(PackingError::NotADisk);
    }
    let mut values = initial(t, cfg, HYPERBOLIC_START)?;
    for v in t.boundary_vertices() {
        values[v] = 0.0;
    }
    if values.iter().enumerate().any(|(v, &s)| !t.is_boundary(v) && !(s > 0.0 && s < 1.0)) {
        return Err(PackingError::BadInput("interior s values must lie in (0, 1)".into()));
    }
    let mut label = PackingLabel::hyperbolic_s(values);
    let stats = iterate(t, &mut label, cfg)?;
    Ok((label, stats))
}

fn initial(t: &Triangulation, cfg: &SolverConfig, default: f64) -> Result<Vec<f64>, PackingError> {
    match &cfg.initial {
        Some(v) if v.len() == t.vertex_count() => Ok(v.clone()),
        Some(v) => Err(PackingError::BadInput(format!("initial label has {} entries", v.len()))),
        None => Ok(vec![default; t.vertex_count()]),
    }
}

struct Flowers {
    free: Vec<usize>,
    petals: Vec<Vec<(usize, usize)>>,
}

impl Flowers {
    fn new(t: &Triangulation) -> Self {
        let free = t.interior_vertices();
        let petals = (0..t.vertex_count())
            .map(|v| {
                t.vertex_triangles(v)
                    .iter()
                    .map(|&k| {
                        let [_, a, b] = rotate_to(t.triangles()[k], v);
                        (a, b)
                    })
                    .collect()
            })
            .collect();
        Flowers { free, petals }
    }

    fn angle_sum(&self, label: &PackingLabel, v: usize) -> f64 {
        self.petals[v].iter().map(|&(a, b)| label.angle(v, a, b)).sum()
    }

    fn residual(&self, label: &PackingLabel) -> f64 {
        self.free.iter().map(|&v| (self.angle_sum(label, v) - TAU).abs()).fold(0.0, f64::max)
    }
}

fn to_y(g: LabelGeometry, x: f64) -> f64 {
    match g {
        LabelGeometry::Euclidean => x.ln(),
        LabelGeometry::Hyperbolic => (-x.ln()).ln(),
    }
}

fn from_y(g: LabelGeometry, y: f64) -> f64 {
    match g {
        LabelGeometry::Euclidean => y.exp(),
        LabelGeometry::Hyperbolic => (-y.exp()).exp(),
    }
}

fn admissible(g: LabelGeometry, x: f64) -> bool {
    match g {
        LabelGeometry::Euclidean => x > 0.0 && x.is_finite(),
        LabelGeometry::Hyperbolic => x > 0.0 && x < 1.0,
    }
}

fn iterate(t: &Triangulation, label: &mut PackingLabel, cfg: &SolverConfig) -> Result<SolveStats, PackingError> {
    let fl = Flowers::new(t);
    let g = label.geometry;
    let mut residual = fl.residual(label);
    let mut stats = SolveStats { sweeps: 0, supersteps: 0, residual };
    let mut prev_step: Option<Vec<f64>> = None;
    while residual > cfg.tol {
        if stats.sweeps >= cfg.max_sweeps {
            return Err(PackingError::NoConvergence {
                sweeps: stats.sweeps,
                residual,
                label: Box::new(label.clone()),
            });
        }
        stats.sweeps += 1;
        let before: Vec<f64> = fl.free.iter().map(|&v| to_y(g, label.values[v])).collect();
        for &v in &fl.free {
            let theta = fl.angle_sum(label, v);
            let k = fl.petals[v].len();
            let x = label.values[v];
            label.values[v] = match g {
                LabelGeometry::Euclidean => euclidean_update(x, theta, k),
                LabelGeometry::Hyperbolic => hyperbolic_update(x, theta, k),
            };
        }
        residual = fl.residual(label);
        let after: Vec<f64> = fl.free.iter().map(|&v| to_y(g, label.values[v])).collect();
        let step: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();

        if let Some(prev) = prev_step.take() {
            let n1 = norm(&step);
            let n0 = norm(&prev);
            if n0 > 0.0 && n1 > 0.0 {
                let ratio = n1 / n0;
                let cos = dot(&step, &prev) / (n0 * n1);
                if cos > 0.99 && ratio < 0.9999 {
                    let mut factor = (ratio / (1.0 - ratio)).min(MAX_SUPERSTEP);
                    while factor >= 1.0 {
                        let mut cand = label.clone();
                        let ok = fl.free.iter().enumerate().all(|(i, &v)| {
                            let x = from_y(g, after[i] + factor * step[i]);
                            cand.values[v] = x;
                            admissible(g, x)
                        });
                        if ok {
                            let r = fl.residual(&cand);
                            if r < residual {
                                *label = cand;
                                residual = r;
                                stats.supersteps += 1;
                                break;
                            }
                        }
                        factor /= 4.0;
                    }
                    if factor >= 1.0 {
                        continue;
                    }
                }
            }
        }
        prev_step = Some(step);
    }
    stats.residual = residual;
    Ok(stats)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_triangulation;
    use crate::packing::angles::{euclidean_angle, hyperbolic_angle};
    use std::f64::consts::PI;

    fn flower() -> Triangulation {
        let tris: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
        build_triangulation(&tris).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        // f decreasing on [lo, hi] with a sign change
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn unit_flower() {
        let t = flower();
        let cfg = SolverConfig { initial: Some(vec![3.0; 7]), ..Default::default() };
        let (label, stats) = solve_euclidean(&t, &[1.0; 6], &cfg).unwrap();
        assert!((label.values[0] - 1.0).abs() < 1e-10);
        assert!(stats.residual <= 1e-10);
    }

    #[test]
    fn lopsided_flower_matches_bisection() {
        let t = flower();
        let bd = [1.0, 1.0, 1.0, 1.0, 1.0, 2.0];
        let (label, stats) = solve_euclidean(&t, &bd, &SolverConfig::default()).unwrap();
        assert!(stats.residual <= 1e-10);
        let petals: Vec<f64> = t.boundary_vertices().iter().map(|&v| label.values[v]).collect();
        let sum = |r: f64| (0..6).map(|i| euclidean_angle(r, petals[i], petals[(i + 1) % 6])).sum::<f64>() - 2.0 * PI;
        let oracle = bisect(sum, 1e-3, 10.0);
        assert!((label.values[0] - oracle).abs() < 1e-9, "{} vs {oracle}", label.values[0]);
    }

    #[test]
    fn maximal_flower_matches_root_find() {
        let t = flower();
        let (label, _) = solve_maximal_hyperbolic(&t, &SolverConfig::default()).unwrap();
        let sum = |s: f64| 6.0 * hyperbolic_angle(s, 0.0, 0.0) - 2.0 * PI;
        let oracle = bisect(|s| -sum(s), 1e-6, 1.0 - 1e-12);
        assert!((label.values[0] - oracle).abs() < 1e-12);
        assert!((oracle - 0.5).abs() < 1e-12);
        assert!(t.boundary_vertices().iter().all(|&v| label.values[v] == 0.0));
    }
}
