//! Triangulations, planar realizations, combinatorial disks and domain filling.

mod domain;
mod hexfill;
pub mod io;
pub mod torus;

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::geom::{signed_area2, Point};

pub use domain::Domain;
pub use hexfill::{hex_fill, hex_patch, HexFill};
pub use torus::{equilateral_torus, lattice_torus, Torus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("no triangles given")]
    Empty,
    #[error("triangle {0} repeats a vertex")]
    DegenerateTriple(usize),
    #[error("vertex {0} belongs to no triangle")]
    IsolatedVertex(usize),
    #[error("vertex id {0} is out of range")]
    BadVertex(usize),
    #[error("edge ({0}, {1}) belongs to {2} triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("link of vertex {0} is neither a single cycle nor a single path")]
    NonManifoldVertex(usize),
    #[error("triangulation is not orientable")]
    Unorientable,
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("no lattice circle fits inside the domain")]
    EmptyCarrier,
    #[error("carrier is not a closed disk: {0}")]
    NotADisk(String),
    #[error("invalid realization: {0}")]
    BadRealization(String),
    #[error("malformed mesh file: {0}")]
    Parse(String),
}

/// Combinatorics of an oriented triangulated surface.
///
/// Triangles are stored with a consistent orientation. Edges are canonical
/// `(min, max)` pairs sorted lexicographically; edge ids index that order.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertex_count: usize,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
    half_edges: HashMap<(usize, usize), usize>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    boundary_vertex: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
}

/// Build and validate a triangulation, reorienting triangles to agree with the first one
/// of each connected component.
pub fn build_triangulation(triples: &[[usize; 3]]) -> Result<Triangulation, MeshError> {
    let n = triples.iter().flat_map(|t| t.iter()).max().map_or(0, |m| m + 1);
    Triangulation::new(n, triples)
}

impl Triangulation {
    pub fn new(vertex_count: usize, triples: &[[usize; 3]]) -> Result<Self, MeshError> {
        if triples.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut used = vec![false; vertex_count];
        for (k, t) in triples.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::DegenerateTriple(k));
            }
            for &v in t {
                if v >= vertex_count {
                    return Err(MeshError::BadVertex(v));
                }
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::IsolatedVertex(v));
        }

        let mut incident: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, t) in triples.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                incident.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        let mut edges: Vec<[usize; 2]> = incident.keys().map(|&(a, b)| [a, b]).collect();
        edges.sort_unstable();
        for e in &edges {
            let c = incident[&(e[0], e[1])].len();
            if c > 2 {
                return Err(MeshError::NonManifoldEdge(e[0], e[1], c));
            }
        }

        let triangles = orient(triples, &incident)?;

        let mut half_edges = HashMap::with_capacity(3 * triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            for e in 0..3 {
                if half_edges.insert((t[e], t[(e + 1) % 3]), k).is_some() {
                    return Err(MeshError::Unorientable);
                }
            }
        }
        let edge_index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, e)| ((e[0], e[1]), i)).collect();
        let edge_triangles: Vec<(usize, Option<usize>)> = edges
            .iter()
            .map(|e| {
                let a = half_edges.get(&(e[0], e[1])).copied();
                let b = half_edges.get(&(e[1], e[0])).copied();
                match (a, b) {
                    (Some(x), y) => (x, y),
                    (None, Some(y)) => (y, None),
                    (None, None) => unreachable!("edge without triangle"),
                }
            })
            .collect();

        let mut boundary_vertex = vec![false; vertex_count];
        let mut neighbors = vec![Vec::new(); vertex_count];
        for (i, e) in edges.iter().enumerate() {
            neighbors[e[0]].push(e[1]);
            neighbors[e[1]].push(e[0]);
            if edge_triangles[i].1.is_none() {
                boundary_vertex[e[0]] = true;
                boundary_vertex[e[1]] = true;
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        let mut vertex_triangles = vec![Vec::new(); vertex_count];
        for (k, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_triangles[v].push(k);
            }
        }

        let tri = Triangulation {
            vertex_count,
            triangles,
            edges,
            edge_index,
            half_edges,
            edge_triangles,
            boundary_vertex,
            neighbors,
            vertex_triangles,
        };
        for v in 0..vertex_count {
            if !tri.link_is_manifold(v) {
                return Err(MeshError::NonManifoldVertex(v));
            }
        }
        Ok(tri)
    }

    fn link_is_manifold(&self, v: usize) -> bool {
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut has_pred: HashMap<usize, bool> = HashMap::new();
        for &k in &self.vertex_triangles[v] {
            let [_, b, c] = rotate_to(self.triangles[k], v);
            next.insert(b, c);
            has_pred.entry(b).or_insert(false);
            has_pred.insert(c, true);
        }
        let starts: Vec<usize> = has_pred.iter().filter(|(_, &p)| !p).map(|(&x, _)| x).collect();
        let start = match starts.len() {
            0 => *next.keys().min().expect("vertex has triangles"),
            1 => starts[0],
            _ => return false,
        };
        let mut steps = 0;
        let mut cur = start;
        while let Some(&nx) = next.get(&cur) {
            steps += 1;
            cur = nx;
            if cur == start || steps > next.len() {
                break;
            }
        }
        steps == next.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Canonical `(min, max)` edges in lexicographic order.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Triangles on either side of an edge; the second is `None` on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    /// The triangle containing the directed edge `a -> b`.
    pub fn triangle_with_half_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.half_edges.get(&(a, b)).copied()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].1.is_none()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&v| self.boundary_vertex[v]).collect()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&v| !self.boundary_vertex[v]).collect()
    }

    pub fn is_closed(&self) -> bool {
        !self.boundary_vertex.iter().any(|&b| b)
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Number of boundary cycles.
    pub fn boundary_components(&self) -> usize {
        let mut seen = vec![false; self.vertex_count];
        let mut count = 0;
        for s in 0..self.vertex_count {
            if !self.boundary_vertex[s] || seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &w in &self.neighbors[v] {
                    let e = self.edge_id(v, w).expect("neighbor edge");
                    if self.is_boundary_edge(e) && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        bfs(self, &[0]).iter().all(|&d| d != usize::MAX)
    }

    /// True for a connected, orientable surface with one boundary cycle and Euler characteristic 1.
    pub fn is_disk(&self) -> bool {
        self.is_connected() && self.euler_characteristic() == 1 && self.boundary_components() == 1
    }
}

/// Rotate a triple so that `v` comes first, keeping the cyclic order.
pub fn rotate_to(t: [usize; 3], v: usize) -> [usize; 3] {
    if t[0] == v {
        t
    } else if t[1] == v {
        [t[1], t[2], t[0]]
    } else {
        debug_assert_eq!(t[2], v);
        [t[2], t[0], t[1]]
    }
}

fn orient(
    triples: &[[usize; 3]],
    incident: &HashMap<(usize, usize), Vec<usize>>,
) -> Result<Vec<[usize; 3]>, MeshError> {
    let mut out: Vec<Option<[usize; 3]>> = vec![None; triples.len()];
    for seed in 0..triples.len() {
        if out[seed].is_some() {
            continue;
        }
        out[seed] = Some(triples[seed]);
        let mut queue = VecDeque::from([seed]);
        while let Some(k) = queue.pop_front() {
            let t = out[k].expect("placed");
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                for &j in &incident[&(a.min(b), a.max(b))] {
                    if j == k {
                        continue;
                    }
                    let raw = triples[j];
                    let same_dir = (0..3).any(|i| raw[i] == a && raw[(i + 1) % 3] == b);
                    let fixed = if same_dir { [raw[0], raw[2], raw[1]] } else { raw };
                    match out[j] {
                        None => {
                            out[j] = Some(fixed);
                            queue.push_back(j);
                        }
                        Some(prev) if prev != fixed => return Err(MeshError::Unorientable),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    Ok(out.into_iter().map(|t| t.expect("oriented")).collect())
}

/// Breadth-first graph distances from a set of sources; unreachable vertices get `usize::MAX`.
pub fn bfs(t: &Triangulation, sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; t.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in t.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn combinatorial_distance(t: &Triangulation, v: usize, w: usize) -> Result<usize, MeshError> {
    for x in [v, w] {
        if x >= t.vertex_count() {
            return Err(MeshError::BadVertex(x));
        }
    }
    match bfs(t, &[v])[w] {
        usize::MAX => Err(MeshError::Disconnected(v, w)),
        d => Ok(d),
    }
}

/// Graph distance from `v` to the boundary; `usize::MAX` on closed surfaces.
pub fn generation_of(t: &Triangulation, v: usize) -> usize {
    generations(t)[v]
}

/// `generation_of` for every vertex at once.
pub fn generations(t: &Triangulation) -> Vec<usize> {
    bfs(t, &t.boundary_vertices())
}

/// A realized combinatorial closed disk `D_m(center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialDisk {
    pub center: usize,
    pub generation: usize,
    pub vertex_set: Vec<usize>,
}

impl CombinatorialDisk {
    /// The ball of combinatorial radius `m` about `center`, if it is a closed disk whose
    /// boundary sits exactly at distance `m`.
    pub fn new(t: &Triangulation, center: usize, m: usize) -> Option<Self> {
        let dist = bfs(t, &[center]);
        let vertex_set: Vec<usize> = (0..t.vertex_count()).filter(|&v| dist[v] <= m).collect();
        if m == 0 {
            return Some(CombinatorialDisk { center, generation: 0, vertex_set });
        }
        let mut local = vec![usize::MAX; t.vertex_count()];
        for (i, &v) in vertex_set.iter().enumerate() {
            local[v] = i;
        }
        let sub: Vec<[usize; 3]> = t
            .triangles()
            .iter()
            .filter(|tri| tri.iter().all(|&v| dist[v] <= m))
            .map(|tri| [local[tri[0]], local[tri[1]], local[tri[2]]])
            .collect();
        let st = Triangulation::new(vertex_set.len(), &sub).ok()?;
        if !st.is_disk() {
            return None;
        }
        let ok = (0..vertex_set.len()).all(|i| st.is_boundary(i) == (dist[vertex_set[i]] == m));
        ok.then_some(CombinatorialDisk { center, generation: m, vertex_set })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Euclidean,
    Poincare,
}

impl Geometry {
    pub fn as_str(self) -> &'static str {
        match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Poincare => "poincare",
        }
    }
}

/// Vertex positions realizing a triangulation in the plane or the Poincaré disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarRealization {
    pub positions: Vec<Point>,
    pub geometry: Geometry,
}

impl PlanarRealization {
    pub fn new(positions: Vec<Point>, geometry: Geometry) -> Self {
        PlanarRealization { positions, geometry }
    }

    /// Twice the signed area of triangle `k`.
    pub fn signed_area2(&self, t: &Triangulation, k: usize) -> f64 {
        let [a, b, c] = t.triangles()[k];
        signed_area2(&self.positions[a], &self.positions[b], &self.positions[c])
    }

    /// Checks non-degeneracy, a common orientation sign and the disk constraints.
    pub fn validate(&self, t: &Triangulation) -> Result<(), MeshError> {
        if self.positions.len() != t.vertex_count() {
            return Err(MeshError::BadRealization(format!(
                "{} positions for {} vertices",
                self.positions.len(),
                t.vertex_count()
            )));
        }
        let mut sign = 0.0;
        for k in 0..t.triangles().len() {
            let a = self.signed_area2(t, k);
            if a == 0.0 || !a.is_finite() {
                return Err(MeshError::BadRealization(format!("triangle {k} is degenerate")));
            }
            if sign == 0.0 {
                sign = a.signum();
            } else if a.signum() != sign {
                return Err(MeshError::BadRealization(format!("triangle {k} is flipped")));
            }
        }
        if self.geometry == Geometry::Poincare {
            for (v, p) in self.positions.iter().enumerate() {
                let r = p.norm();
                let bad = if t.is_boundary(v) { r > 1.0 } else { r >= 1.0 };
                if bad {
                    return Err(MeshError::BadRealization(format!("vertex {v} lies outside the disk")));
                }
            }
        }
        Ok(())
    }
}
