//! Discrete conformal geometry toolkit.
//!
//! The crate covers discrete conformal structures on triangulated surfaces,
//! circle packing and vertex scaling solvers, piecewise linear maps between two
//! realizations of one triangulation, Karcher-mean barycentric maps, and the
//! convergence experiment that ties them together for planar domains.

pub mod barycentric;
pub mod geom;
pub mod mesh;
pub mod mobius;
pub mod packing;
pub mod pipeline;
pub mod plmap;
pub mod structure;
pub mod vertexscale;

pub use geom::Point;
pub use mesh::{
    build_triangulation, combinatorial_distance, generation_of, hex_fill, CombinatorialDisk,
    Domain, Geometry, HexFill, MeshError, PlanarRealization, Triangulation,
};
pub use packing::{Layout, PackingError, PackingLabel, SolverConfig};
pub use vertexscale::{CurvatureTarget, FlattenResult, VertexScaleError};
pub use plmap::{PLMap, PlMapError};
pub use structure::{ConformalFactors, ConformalStructure, EdgeLengths, StructureError, TriangleMetric};
