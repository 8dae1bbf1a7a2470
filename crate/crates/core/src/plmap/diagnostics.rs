//! Ratio fields, LDCR estimates and the two-sided checks built on them.

use std::collections::BTreeMap;

use nalgebra::Vector2;

use super::PLMap;
use crate::geom::point_segment_distance;
use crate::mesh::{bfs, generation_of, generations, CombinatorialDisk, PlanarRealization, Triangulation};
use crate::structure::{edge_lengths, ConformalFactors, ConformalStructure, StructureError};

/// Relative slack for rounding in bound comparisons.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// What the `id` column of a [`CheckRow`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdKind {
    Edge,
    Triangle,
    Vertex,
    Generation,
}

impl IdKind {
    pub fn column(self) -> &'static str {
        match self {
            IdKind::Edge => "edge_id",
            IdKind::Triangle => "triangle_id",
            IdKind::Vertex => "vertex_id",
            IdKind::Generation => "m",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub id: usize,
    pub m: usize,
    pub quantity: &'static str,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        let lo = self.lower - ROUNDING_SLACK * self.lower.abs().max(self.value.abs());
        let hi = self.upper + ROUNDING_SLACK * self.upper.abs().max(self.value.abs());
        self.value >= lo && self.value <= hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub id_kind: IdKind,
    pub rows: Vec<CheckRow>,
    /// Candidates left out because a hypothesis of the bound fails.
    pub skipped: usize,
}

impl CheckReport {
    fn new(name: &'static str, id_kind: IdKind) -> Self {
        CheckReport { name, id_kind, rows: Vec::new(), skipped: 0 }
    }

    pub fn violations(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.pass()).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::pass)
    }
}

/// `H(v) = e^{f̃(v)} / e^{f(v)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioField {
    pub h: Vec<f64>,
}

pub fn ratio_field(f: &ConformalFactors, f_tilde: &ConformalFactors) -> RatioField {
    RatioField { h: f.f.iter().zip(&f_tilde.f).map(|(a, b)| (b - a).exp()).collect() }
}

impl RatioField {
    /// `r̃ / r` for circle packing radii.
    pub fn from_radii(r: &[f64], r_tilde: &[f64]) -> Self {
        RatioField { h: r.iter().zip(r_tilde).map(|(a, b)| b / a).collect() }
    }
}

/// `s[m]`: the largest `|H(w)/H(v) − 1|` over edges whose endpoints both have generation
/// at least `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdcrEstimate {
    pub s: Vec<f64>,
}

impl LdcrEstimate {
    /// `s_m`, zero beyond the table.
    pub fn at(&self, m: usize) -> f64 {
        self.s.get(m).copied().unwrap_or(0.0)
    }

    /// `max_{m ≥ 1} m·s_m`.
    pub fn alpha(&self) -> f64 {
        self.s.iter().enumerate().skip(1).map(|(m, s)| m as f64 * s).fold(0.0, f64::max)
    }
}

pub fn estimate_ldcr(t: &Triangulation, f: &ConformalFactors, f_tilde: &ConformalFactors) -> LdcrEstimate {
    let gen = generations(t);
    let logh: Vec<f64> = f.f.iter().zip(&f_tilde.f).map(|(a, b)| b - a).collect();
    let mut per_m: BTreeMap<usize, f64> = BTreeMap::new();
    for &[v, w] in t.edges() {
        let m = gen[v].min(gen[w]);
        let x = (logh[w] - logh[v]).abs().exp_m1();
        let e = per_m.entry(m).or_insert(0.0);
        *e = e.max(x);
    }
    let top = per_m.keys().next_back().copied().unwrap_or(0);
    let mut s = vec![0.0; top + 1];
    let mut running: f64 = 0.0;
    for m in (0..=top).rev() {
        running = running.max(per_m.get(&m).copied().unwrap_or(0.0));
        s[m] = running;
    }
    LdcrEstimate { s }
}

/// `e^F`: the linear interpolation of `H²` over each triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedFactor {
    pub h2: Vec<f64>,
}

impl InterpolatedFactor {
    pub fn new(rf: &RatioField) -> Self {
        InterpolatedFactor { h2: rf.h.iter().map(|h| h * h).collect() }
    }

    pub fn at(&self, t: &Triangulation, k: usize, lambda: [f64; 3]) -> f64 {
        let tri = t.triangles()[k];
        (0..3).map(|i| lambda[i] * self.h2[tri[i]]).sum()
    }
}

pub fn interpolate_ef(t: &Triangulation, rf: &RatioField, k: usize, lambda: [f64; 3]) -> f64 {
    let tri = t.triangles()[k];
    (0..3).map(|i| lambda[i] * rf.h[tri[i]] * rf.h[tri[i]]).sum()
}

/// `(1 − s_m)H(v) ≤ H(w) ≤ (1 + s_m)H(v)` and the squared form with `3s_m`, on edges with
/// `s_m ≤ 1`.
pub fn h_sandwich_check(t: &Triangulation, rf: &RatioField, ldcr: &LdcrEstimate) -> CheckReport {
    let gen = generations(t);
    let mut rep = CheckReport::new("h_sandwich", IdKind::Edge);
    for (e, &[a, b]) in t.edges().iter().enumerate() {
        let m = gen[a].min(gen[b]);
        let s = ldcr.at(m);
        if s > 1.0 {
            rep.skipped += 1;
            continue;
        }
        for (v, w) in [(a, b), (b, a)] {
            let r = rf.h[w] / rf.h[v];
            rep.rows.push(CheckRow { id: e, m, quantity: "H(w)/H(v)", lower: 1.0 - s, value: r, upper: 1.0 + s });
            rep.rows.push(CheckRow {
                id: e,
                m,
                quantity: "H2(w)/H2(v)",
                lower: 1.0 - 3.0 * s,
                value: r * r,
                upper: 1.0 + 3.0 * s,
            });
        }
    }
    rep
}

/// `H²(v)ℓ²(1 − 3s_m) ≤ ℓ̃² ≤ H²(v)ℓ²(1 + 3s_m)` at both ends of every edge with `s_m ≤ 1`.
pub fn edge_sandwich_check(
    t: &Triangulation,
    s: &ConformalStructure,
    f: &ConformalFactors,
    f_tilde: &ConformalFactors,
    ldcr: &LdcrEstimate,
) -> Result<CheckReport, StructureError> {
    let l = edge_lengths(s, f, t)?;
    let lt = edge_lengths(s, f_tilde, t)?;
    let rf = ratio_field(f, f_tilde);
    let gen = generations(t);
    let mut rep = CheckReport::new("edge_sandwich", IdKind::Edge);
    for (e, &[a, b]) in t.edges().iter().enumerate() {
        let m = gen[a].min(gen[b]);
        let sm = ldcr.at(m);
        if sm > 1.0 {
            rep.skipped += 1;
            continue;
        }
        for v in [a, b] {
            let base = rf.h[v] * rf.h[v] * l.ell[e] * l.ell[e];
            rep.rows.push(CheckRow {
                id: e,
                m,
                quantity: "l~2",
                lower: base * (1.0 - 3.0 * sm),
                value: lt.ell[e] * lt.ell[e],
                upper: base * (1.0 + 3.0 * sm),
            });
        }
    }
    Ok(rep)
}

/// D-frame sample vectors: both basis vectors, their sum and their difference.
const SAMPLE_VECTORS: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]];
/// Sample points: the three corners and the barycenter.
const SAMPLE_POINTS: [[f64; 3]; 4] =
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]];

/// `(1 − C s_m)|X|²_{e^F g} ≤ |X|²_{φ*g̃} ≤ (1 + C s_m)|X|²_{e^F g}` with `C = 216/ϑ²`, on the
/// given triangles whose generation has `s_m ≤ 1/6`. Each triangle contributes its smallest
/// and largest ratio.
pub fn metric_sandwich_check(
    map: &PLMap,
    ef: &InterpolatedFactor,
    theta: f64,
    ldcr: &LdcrEstimate,
    triangles: &[usize],
) -> CheckReport {
    let t = &map.triangulation;
    let gen = generations(t);
    let c = 216.0 / (theta * theta);
    let mut rep = CheckReport::new("metric_sandwich", IdKind::Triangle);
    for &k in triangles {
        let tri = t.triangles()[k];
        let m = tri.iter().map(|&v| gen[v]).min().expect("three vertices");
        let s = ldcr.at(m);
        if s > 1.0 / 6.0 {
            rep.skipped += 1;
            continue;
        }
        let g = map.domain_metric(k);
        let pull = map.pullback_metric(k);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for lam in SAMPLE_POINTS {
            let e = ef.at(t, k, lam);
            for x in SAMPLE_VECTORS {
                let x = Vector2::new(x[0], x[1]);
                let r = pull.norm_sq(&x) / (e * g.norm_sq(&x));
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        for (quantity, value) in [("min ratio", lo), ("max ratio", hi)] {
            rep.rows.push(CheckRow { id: k, m, quantity, lower: 1.0 - c * s, value, upper: 1.0 + c * s });
        }
    }
    rep
}

/// `|d e^F|²_{g} ≤ (6αH²(v₀)/(mϑε))²` on the given triangles of generation `m ≥ 1`, for every
/// corner `v₀` (the smallest `H²` is binding).
pub fn ef_lipschitz_check(
    map: &PLMap,
    ef: &InterpolatedFactor,
    alpha: f64,
    theta: f64,
    eps: f64,
    triangles: &[usize],
) -> CheckReport {
    let t = &map.triangulation;
    let gen = generations(t);
    let mut rep = CheckReport::new("ef_lipschitz", IdKind::Triangle);
    for &k in triangles {
        let tri = t.triangles()[k];
        let m = tri.iter().map(|&v| gen[v]).min().expect("three vertices");
        if m == 0 {
            rep.skipped += 1;
            continue;
        }
        let h = tri.map(|v| ef.h2[v]);
        let d = Vector2::new(h[1] - h[0], h[2] - h[0]);
        let Some(inv) = map.domain_metric(k).gd.try_inverse() else {
            rep.skipped += 1;
            continue;
        };
        let lhs = d.dot(&(inv * d));
        let hmin = h.iter().copied().fold(f64::INFINITY, f64::min);
        let rhs = (6.0 * alpha * hmin / (m as f64 * theta * eps)).powi(2);
        rep.rows.push(CheckRow { id: k, m, quantity: "|de^F|^2", lower: 0.0, value: lhs, upper: rhs });
    }
    rep
}

/// Edges of the sub-complex spanned by `set` that lie on exactly one of its triangles.
fn subcomplex_boundary(t: &Triangulation, inside: &[bool]) -> Vec<[usize; 2]> {
    let mut count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for tri in t.triangles() {
        if tri.iter().all(|&v| inside[v]) {
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                *count.entry([a.min(b), a.max(b)]).or_insert(0) += 1;
            }
        }
    }
    count.into_iter().filter(|&(_, n)| n == 1).map(|(e, _)| e).collect()
}

fn distance_to_edges(p: &crate::geom::Point, pos: &[crate::geom::Point], edges: &[[usize; 2]]) -> f64 {
    edges.iter().map(|&[a, b]| point_segment_distance(p, &pos[a], &pos[b])).fold(f64::INFINITY, f64::min)
}

/// `ϑmε ≤ δ ≤ mε` for every realized `D_m(center)` with `1 ≤ m ≤ max_m`, where `δ` is the
/// flat distance from the center to the boundary of the disk.
pub fn generation_distance_check(
    t: &Triangulation,
    r: &PlanarRealization,
    center: usize,
    theta: f64,
    eps: f64,
    max_m: usize,
) -> CheckReport {
    let mut rep = CheckReport::new("generation_distance", IdKind::Generation);
    let top = generation_of(t, center).min(max_m);
    for m in 1..=top {
        let Some(disk) = CombinatorialDisk::new(t, center, m) else {
            rep.skipped += 1;
            continue;
        };
        let mut inside = vec![false; t.vertex_count()];
        disk.vertex_set.iter().for_each(|&v| inside[v] = true);
        let delta = distance_to_edges(&r.positions[center], &r.positions, &subcomplex_boundary(t, &inside));
        let mf = m as f64;
        rep.rows.push(CheckRow {
            id: m,
            m,
            quantity: "delta",
            lower: theta * mf * eps,
            value: delta,
            upper: mf * eps,
        });
    }
    rep
}

/// `m ≥ R/(2ε)` where `m` is the largest generation of a realized disk `D_m(v)` inside the
/// closed ball `B_R(v)`, with `R` the smaller of `radius` and the distance from `v` to the
/// carrier boundary. Vertices with `R < 2ε` are skipped.
pub fn generation_lower_bound_check(
    t: &Triangulation,
    r: &PlanarRealization,
    vertices: &[usize],
    radius: f64,
    eps: f64,
) -> CheckReport {
    let mut rep = CheckReport::new("generation_lower_bound", IdKind::Vertex);
    let boundary: Vec<[usize; 2]> =
        t.edges().iter().enumerate().filter(|&(e, _)| t.is_boundary_edge(e)).map(|(_, &e)| e).collect();
    let gen = generations(t);
    let pos = &r.positions;
    for &v in vertices {
        let big_r = radius.min(distance_to_edges(&pos[v], pos, &boundary));
        if big_r < 2.0 * eps {
            rep.skipped += 1;
            continue;
        }
        let dist = bfs(t, &[v]);
        // smallest graph distance among vertices outside the ball
        let first_out = (0..t.vertex_count())
            .filter(|&w| (pos[w] - pos[v]).norm() > big_r)
            .map(|w| dist[w])
            .min()
            .unwrap_or(usize::MAX);
        let mut m = first_out.saturating_sub(1).min(gen[v]);
        while m > 0 && CombinatorialDisk::new(t, v, m).is_none() {
            m -= 1;
        }
        rep.rows.push(CheckRow {
            id: v,
            m,
            quantity: "m",
            lower: big_r / (2.0 * eps),
            value: m as f64,
            upper: f64::INFINITY,
        });
    }
    rep
}
