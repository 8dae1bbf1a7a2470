//! Flat tori from a fundamental-domain lattice with wraparound identifications.

use super::{MeshError, Triangulation};
use crate::geom::Point;

#[derive(Debug, Clone)]
pub struct Torus {
    pub triangulation: Triangulation,
    /// Flat edge lengths in canonical edge order.
    pub lengths: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

/// An `nx` by `ny` torus whose cells are spanned by the lattice vectors `a`, `b`, each cell
/// split along `b - a`. Vertex `(i, j)` has id `i + nx * j`. Needs `nx, ny >= 3`.
pub fn lattice_torus(nx: usize, ny: usize, a: Point, b: Point) -> Result<Torus, MeshError> {
    if nx < 3 || ny < 3 {
        return Err(MeshError::NotADisk(format!("torus needs at least 3x3 cells, got {nx}x{ny}")));
    }
    let id = |i: usize, j: usize| (i % nx) + nx * (j % ny);
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            tris.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let t = Triangulation::new(nx * ny, &tris)?;
    let mut lengths = vec![0.0; t.edges().len()];
    let (la, lb, lab) = (a.norm(), b.norm(), (b - a).norm());
    for j in 0..ny {
        for i in 0..nx {
            let v = id(i, j);
            lengths[t.edge_id(v, id(i + 1, j)).expect("edge")] = la;
            lengths[t.edge_id(v, id(i, j + 1)).expect("edge")] = lb;
            lengths[t.edge_id(id(i + 1, j), id(i, j + 1)).expect("edge")] = lab;
        }
    }
    Ok(Torus { triangulation: t, lengths, nx, ny })
}

/// The equilateral torus, whose triangulation is strictly Delaunay.
pub fn equilateral_torus(nx: usize, ny: usize) -> Result<Torus, MeshError> {
    lattice_torus(nx, ny, Point::new(1.0, 0.0), Point::new(0.5, 3f64.sqrt() / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_is_closed_with_zero_euler_characteristic() {
        let t = equilateral_torus(4, 5).unwrap();
        assert!(t.triangulation.is_closed());
        assert_eq!(t.triangulation.euler_characteristic(), 0);
        assert_eq!(t.triangulation.edges().len(), 60);
        assert!(t.lengths.iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn square_torus_has_diagonals() {
        let t = lattice_torus(3, 3, Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        let diag = t.lengths.iter().filter(|&&l| (l - 2f64.sqrt()).abs() < 1e-15).count();
        assert_eq!(diag, 9);
    }
}
