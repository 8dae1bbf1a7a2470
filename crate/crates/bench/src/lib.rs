//! Fixtures shared by the benchmarks.

use discon_core::mesh::equilateral_torus;
use discon_core::{hex_fill, Domain, EdgeLengths, HexFill, Point, Triangulation};

/// The hexagonal carrier of the unit disk at circle radius `1/n`.
pub fn disk_carrier(n: usize) -> HexFill {
    hex_fill(&Domain::unit_disk(), n, Point::new(0.0, 0.0)).expect("the unit disk has a carrier for n >= 2")
}

/// An equilateral `k` by `k` torus whose lengths are scaled by a fixed pattern within 5%.
pub fn wobbly_torus(k: usize) -> (Triangulation, EdgeLengths) {
    let torus = equilateral_torus(k, k).expect("k >= 3");
    let ell = torus.lengths.iter().enumerate().map(|(e, l)| l * (1.0 + 0.05 * (e as f64 * 0.7).sin())).collect();
    (torus.triangulation, EdgeLengths { ell })
}
