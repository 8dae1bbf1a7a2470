//! Angle sums, the Length-Area bound, ratio tables and the hexagonal packing constant.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use super::{layout, solve_maximal_hyperbolic, PackingError, PackingLabel, SolverConfig};
use crate::mesh::{bfs, hex_patch, rotate_to, Triangulation};

/// Per-vertex angle sums and curvatures `2π − Σ` (interior) or `π − Σ` (boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSumReport {
    pub angle_sum: Vec<f64>,
    pub curvature: Vec<f64>,
    pub boundary: Vec<bool>,
}

impl AngleSumReport {
    pub fn from_angle_sums(t: &Triangulation, angle_sum: Vec<f64>) -> Self {
        let boundary: Vec<bool> = (0..t.vertex_count()).map(|v| t.is_boundary(v)).collect();
        let curvature = angle_sum.iter().zip(&boundary).map(|(s, &b)| if b { PI - s } else { TAU - s }).collect();
        AngleSumReport { angle_sum, curvature, boundary }
    }

    pub fn max_interior_abs(&self) -> f64 {
        self.curvature.iter().zip(&self.boundary).filter(|(_, &b)| !b).map(|(k, _)| k.abs()).fold(0.0, f64::max)
    }

    pub fn total_curvature(&self) -> f64 {
        self.curvature.iter().sum()
    }
}

pub fn angle_sums(t: &Triangulation, label: &PackingLabel) -> AngleSumReport {
    let mut sums = vec![0.0; t.vertex_count()];
    for &tri in t.triangles() {
        for &v in &tri {
            let [_, a, b] = rotate_to(tri, v);
            sums[v] += label.angle(v, a, b);
        }
    }
    AngleSumReport::from_angle_sums(t, sums)
}

/// Area of the triangle of centers of three mutually tangent circles.
pub fn heron_area(r0: f64, r1: f64, r2: f64) -> f64 {
    (r0 * r1 * r2 * (r0 + r1 + r2)).sqrt()
}

/// `1 / sqrt(Σ 1/n_j)` for disjoint chains with `n_j` circles each.
pub fn length_area_bound(chains: &[Vec<usize>]) -> Result<f64, PackingError> {
    if chains.is_empty() || chains.iter().any(|c| c.is_empty()) {
        return Err(PackingError::EmptyChains);
    }
    let mut seen = BTreeSet::new();
    for c in chains {
        for &v in c {
            if !seen.insert(v) {
                return Err(PackingError::BadInput(format!("vertex {v} lies on two chains")));
            }
        }
    }
    Ok(1.0 / chains.iter().map(|c| 1.0 / c.len() as f64).sum::<f64>().sqrt())
}

/// Combinatorial rings `{w : d(b, w) = j}` around a boundary vertex `b`, for `j = 1, 2, …`
/// while the ring avoids `anchor`. Only rings that induce a connected path with at least
/// two boundary vertices are returned; each separates `b` from the anchor.
pub fn boundary_rings(t: &Triangulation, b: usize, anchor: usize) -> Vec<Vec<usize>> {
    let dist = bfs(t, &[b]);
    let stop = dist[anchor];
    let mut out = Vec::new();
    for j in 1..stop {
        let ring: Vec<usize> = (0..t.vertex_count()).filter(|&v| dist[v] == j).collect();
        if ring.is_empty() {
            break;
        }
        let on_boundary = ring.iter().filter(|&&v| t.is_boundary(v)).count();
        if on_boundary >= 2 && induces_connected(t, &ring) {
            out.push(ring);
        }
    }
    out
}

fn induces_connected(t: &Triangulation, set: &[usize]) -> bool {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    let mut seen = BTreeSet::from([set[0]]);
    let mut stack = vec![set[0]];
    while let Some(v) = stack.pop() {
        for &w in t.neighbors(v) {
            if members.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == members.len()
}

/// Ratios `H(v) = image radius / domain radius` at probe vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzReport {
    pub table: Vec<(usize, f64)>,
    pub max: f64,
    pub min: f64,
}

pub fn schwarz_ratio_report(domain_radii: &[f64], image_radii: &[f64], probe: &[usize]) -> SchwarzReport {
    let table: Vec<(usize, f64)> = probe.iter().map(|&v| (v, image_radii[v] / domain_radii[v])).collect();
    let max = table.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let min = table.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    SchwarzReport { table, max, min }
}

/// Tangency tolerance used when laying out hexagonal patches.
const PATCH_LAYOUT_TOL: f64 = 1e-10;

/// `s(P_m)`: the largest `r'_v/r'_w − 1` over edges inside the combinatorial ball of radius 2
/// about the center of the maximal packing of the `m`-generation hexagonal patch.
pub fn hexagonal_constant(m: usize, cfg: &SolverConfig) -> Result<f64, PackingError> {
    let patch = hex_patch(m);
    let t = &patch.triangulation;
    let c = patch.anchor_vertex;
    let (label, _) = solve_maximal_hyperbolic(t, cfg)?;
    let lay = layout(t, &label, c, t.neighbors(c)[0], cfg.tol.max(PATCH_LAYOUT_TOL))?;
    let dist = bfs(t, &[c]);
    let worst = t
        .edges()
        .iter()
        .filter(|&&[v, w]| dist[v] <= 2 && dist[w] <= 2)
        .map(|&[v, w]| {
            let (a, b) = (lay.radii[v], lay.radii[w]);
            a.max(b) / a.min(b) - 1.0
        })
        .fold(0.0, f64::max);
    Ok(worst)
}
