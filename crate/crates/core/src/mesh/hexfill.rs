use std::collections::{BTreeMap, BTreeSet};

use super::{Domain, Geometry, MeshError, PlanarRealization, Triangulation};
use crate::geom::Point;

/// Carrier of the hexagonal circle packing of radius `1/n` restricted to a domain.
#[derive(Debug, Clone)]
pub struct HexFill {
    pub triangulation: Triangulation,
    pub realization: PlanarRealization,
    /// Lattice coordinates `(i, j)` of each vertex; the center is `anchor + s(i + j/2, j√3/2)`.
    pub lattice: Vec<(i64, i64)>,
    /// The vertex nearest the anchor point.
    pub anchor_vertex: usize,
    /// Circle radius `1/n`; lattice spacing is twice this.
    pub radius: f64,
}

/// Fill `domain` with the hexagonal packing of circles of radius `1/n`, the lattice
/// anchored at `anchor`.
///
/// A triangle is kept when the closed disks of its three circles lie in the domain. The
/// edge-connected component containing the vertex nearest the anchor is returned, after
/// repeatedly dropping pinch vertices (vertices whose link is disconnected).
pub fn hex_fill(domain: &Domain, n: usize, anchor: Point) -> Result<HexFill, MeshError> {
    assert!(n >= 1, "n must be positive");
    let r = 1.0 / n as f64;
    let s = 2.0 * r;
    let h = s * 3f64.sqrt() / 2.0;
    let center = |i: i64, j: i64| anchor + Point::new(s * (i as f64 + 0.5 * j as f64), h * j as f64);

    let (lo, hi) = domain.bbox();
    let j0 = ((lo.y - anchor.y) / h).floor() as i64 - 1;
    let j1 = ((hi.y - anchor.y) / h).ceil() as i64 + 1;
    let mut fits: BTreeSet<(i64, i64)> = BTreeSet::new();
    for j in j0..=j1 {
        let i0 = ((lo.x - anchor.x) / s - 0.5 * j as f64).floor() as i64 - 1;
        let i1 = ((hi.x - anchor.x) / s - 0.5 * j as f64).ceil() as i64 + 1;
        for i in i0..=i1 {
            if domain.contains_closed_disk(&center(i, j), r) {
                fits.insert((j, i));
            }
        }
    }

    let mut triangles: Vec<[(i64, i64); 3]> = Vec::new();
    for &(j, i) in &fits {
        let up = [(j, i), (j, i + 1), (j + 1, i)];
        let down = [(j, i), (j + 1, i), (j + 1, i - 1)];
        for t in [up, down] {
            if t.iter().all(|k| fits.contains(k)) {
                triangles.push(t);
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptyCarrier);
    }

    let mut removed: BTreeSet<(i64, i64)> = BTreeSet::new();
    loop {
        let live: Vec<[(i64, i64); 3]> =
            triangles.iter().copied().filter(|t| !t.iter().any(|k| removed.contains(k))).collect();
        if live.is_empty() {
            return Err(MeshError::EmptyCarrier);
        }
        let mut verts: BTreeSet<(i64, i64)> = BTreeSet::new();
        for t in &live {
            verts.extend(t.iter().copied());
        }
        let key = |k: &(i64, i64)| {
            let c = center(k.1, k.0) - anchor;
            (c.norm_squared(), *k)
        };
        let seed = *verts
            .iter()
            .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite"))
            .expect("nonempty");
        let component = edge_component(&live, seed);

        let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for t in &component {
            for k in t {
                index.insert(*k, 0);
            }
        }
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let tris: Vec<[usize; 3]> = component.iter().map(|t| [index[&t[0]], index[&t[1]], index[&t[2]]]).collect();
        match Triangulation::new(index.len(), &tris) {
            Ok(tri) => {
                if !tri.is_disk() {
                    return Err(MeshError::NotADisk(format!(
                        "Euler characteristic {}, {} boundary cycles",
                        tri.euler_characteristic(),
                        tri.boundary_components()
                    )));
                }
                let lattice: Vec<(i64, i64)> = index.keys().map(|&(j, i)| (i, j)).collect();
                let positions = lattice.iter().map(|&(i, j)| center(i, j)).collect();
                return Ok(HexFill {
                    triangulation: tri,
                    realization: PlanarRealization::new(positions, Geometry::Euclidean),
                    lattice,
                    anchor_vertex: index[&seed],
                    radius: r,
                });
            }
            Err(MeshError::NonManifoldVertex(v)) => {
                let k = *index.iter().find(|(_, &i)| i == v).expect("indexed").0;
                removed.insert(k);
            }
            Err(e) => return Err(MeshError::NotADisk(e.to_string())),
        }
    }
}

/// The hexagonal patch of `m` generations about the origin, circles of radius 1.
///
/// Vertex `(i, j)` is kept when `max(|i|, |j|, |i + j|) <= m`.
pub fn hex_patch(m: usize) -> HexFill {
    assert!(m >= 1, "a patch needs at least one generation");
    let m = m as i64;
    let h = 3f64.sqrt();
    let inside = |i: i64, j: i64| i.abs().max(j.abs()).max((i + j).abs()) <= m;
    let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for j in -m..=m {
        for i in -m..=m {
            if inside(i, j) {
                let k = index.len();
                index.insert((j, i), k);
            }
        }
    }
    let mut tris = Vec::new();
    for j in -m - 1..=m {
        for i in -m - 1..=m {
            let get = |j: i64, i: i64| index.get(&(j, i)).copied();
            if let (Some(a), Some(b), Some(c)) = (get(j, i), get(j, i + 1), get(j + 1, i)) {
                tris.push([a, b, c]);
            }
            if let (Some(b), Some(d), Some(c)) = (get(j, i + 1), get(j + 1, i + 1), get(j + 1, i)) {
                tris.push([b, d, c]);
            }
        }
    }
    let triangulation = Triangulation::new(index.len(), &tris).expect("hexagonal patch is a disk");
    let lattice: Vec<(i64, i64)> = index.keys().map(|&(j, i)| (i, j)).collect();
    let positions = lattice.iter().map(|&(i, j)| Point::new(2.0 * i as f64 + j as f64, h * j as f64)).collect();
    HexFill {
        triangulation,
        realization: PlanarRealization::new(positions, Geometry::Euclidean),
        lattice,
        anchor_vertex: index[&(0, 0)],
        radius: 1.0,
    }
}

/// Triangles reachable from any triangle incident to `seed` through shared edges, in input order.
fn edge_component(tris: &[[(i64, i64); 3]], seed: (i64, i64)) -> Vec<[(i64, i64); 3]> {
    let mut by_edge: BTreeMap<((i64, i64), (i64, i64)), Vec<usize>> = BTreeMap::new();
    for (k, t) in tris.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            by_edge.entry((a.min(b), a.max(b))).or_default().push(k);
        }
    }
    let mut seen = vec![false; tris.len()];
    let mut stack: Vec<usize> = Vec::new();
    if let Some(k) = tris.iter().position(|t| t.contains(&seed)) {
        seen[k] = true;
        stack.push(k);
    }
    while let Some(k) = stack.pop() {
        let t = tris[k];
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            for &j in &by_edge[&(a.min(b), a.max(b))] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    tris.iter().zip(seen).filter(|(_, s)| *s).map(|(t, _)| *t).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_n4_has_unit_half_edges() {
        let hf = hex_fill(&Domain::unit_disk(), 4, Point::zeros()).unwrap();
        let p = &hf.realization.positions;
        for e in hf.triangulation.edges() {
            assert!(((p[e[0]] - p[e[1]]).norm() - 0.5).abs() < 1e-15);
        }
        assert!(hf.triangulation.is_disk());
        assert_eq!(p[hf.anchor_vertex], Point::zeros());
        assert_eq!(hf.triangulation.triangles().len(), 6);
        assert!(!hf.triangulation.is_boundary(hf.anchor_vertex));
    }

    #[test]
    fn square_carrier_contains_inner_disk() {
        let n = 8;
        let d = Domain::square(1.0);
        let hf = hex_fill(&d, n, Point::zeros()).unwrap();
        let p = &hf.realization.positions;
        for q in p {
            assert!(d.contains_closed_disk(q, 1.0 / n as f64));
        }
        // probe the disk of radius 1 - 4/n on a fine polar grid
        let rad = 1.0 - 4.0 / n as f64;
        let tris = hf.triangulation.triangles();
        for a in 0..64 {
            for k in 0..=16 {
                let t = std::f64::consts::TAU * a as f64 / 64.0;
                let q = Point::new(t.cos(), t.sin()) * (rad * k as f64 / 16.0);
                let inside = tris.iter().any(|t| {
                    let l = crate::geom::barycentric(&q, &p[t[0]], &p[t[1]], &p[t[2]]);
                    l.iter().all(|&x| x >= -1e-12)
                });
                assert!(inside, "{q:?} not covered");
            }
        }
    }

    #[test]
    fn patch_generations() {
        for m in 1..6 {
            let p = hex_patch(m);
            assert_eq!(p.triangulation.vertex_count(), 3 * m * (m + 1) + 1);
            assert_eq!(p.triangulation.triangles().len(), 6 * m * m);
            assert!(p.triangulation.is_disk());
            assert_eq!(crate::mesh::generation_of(&p.triangulation, p.anchor_vertex), m);
        }
        let p = hex_patch(2);
        // opposite corners of the 2-ring hexagon
        let a = p.lattice.iter().position(|&x| x == (2, 0)).unwrap();
        let b = p.lattice.iter().position(|&x| x == (0, 0)).unwrap();
        assert_eq!(crate::mesh::combinatorial_distance(&p.triangulation, a, b).unwrap(), 2);
    }

    #[test]
    fn tiny_domain_is_empty() {
        let d = Domain::Disk { center: Point::zeros(), radius: 0.1 };
        assert_eq!(hex_fill(&d, 4, Point::zeros()).unwrap_err(), MeshError::EmptyCarrier);
    }

    #[test]
    fn annulus_is_not_a_disk() {
        use std::sync::Arc;
        let d = Domain::Predicate {
            inside: Arc::new(|p: &Point| {
                let r = p.norm();
                r < 1.0 && r > 0.4
            }),
            bbox: (Point::new(-1.0, -1.0), Point::new(1.0, 1.0)),
        };
        let err = hex_fill(&d, 12, Point::new(0.7, 0.0)).unwrap_err();
        assert!(matches!(err, MeshError::NotADisk(_)), "{err:?}");
    }
}
