//! Circle packing: labels, solvers, layouts and packing diagnostics.

pub mod angles;
pub mod diagnostics;
mod layout;
mod solver;

use thiserror::Error;

pub use angles::{euclidean_angle, hyperbolic_angle};
pub use diagnostics::{
    angle_sums, boundary_rings, heron_area, hexagonal_constant, length_area_bound, schwarz_ratio_report,
    AngleSumReport, SchwarzReport,
};
pub use layout::{layout, Layout, LAYOUT_SLACK};
pub use solver::{solve_euclidean, solve_maximal_hyperbolic, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelGeometry {
    Euclidean,
    Hyperbolic,
}

/// Per-vertex circle radii.
///
/// Euclidean labels store radii. Hyperbolic labels store `s = e^{-r}`, so horocycles are
/// exactly `s = 0` and large radii never overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingLabel {
    pub geometry: LabelGeometry,
    pub values: Vec<f64>,
}

impl PackingLabel {
    pub fn euclidean(radii: Vec<f64>) -> Self {
        PackingLabel { geometry: LabelGeometry::Euclidean, values: radii }
    }

    pub fn hyperbolic_s(s: Vec<f64>) -> Self {
        PackingLabel { geometry: LabelGeometry::Hyperbolic, values: s }
    }

    /// Radius in the label's geometry; `+∞` for horocycles.
    pub fn radius(&self, v: usize) -> f64 {
        match self.geometry {
            LabelGeometry::Euclidean => self.values[v],
            LabelGeometry::Hyperbolic => -self.values[v].ln(),
        }
    }

    /// Angle at `v0` in the triangle of circles `(v0, v1, v2)`.
    pub fn angle(&self, v0: usize, v1: usize, v2: usize) -> f64 {
        let x = &self.values;
        match self.geometry {
            LabelGeometry::Euclidean => euclidean_angle(x[v0], x[v1], x[v2]),
            LabelGeometry::Hyperbolic => hyperbolic_angle(x[v0], x[v1], x[v2]),
        }
    }
}

/// Angle at `r0` of the triangle of mutually tangent circles. Hyperbolic radii may be `+∞`.
pub fn tangency_angle(r0: f64, r1: f64, r2: f64, geometry: LabelGeometry) -> f64 {
    assert!(r0 > 0.0 && r1 > 0.0 && r2 > 0.0, "radii must be positive");
    match geometry {
        LabelGeometry::Euclidean => euclidean_angle(r0, r1, r2),
        LabelGeometry::Hyperbolic => hyperbolic_angle((-r0).exp(), (-r1).exp(), (-r2).exp()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest admissible `|2π − angle sum|` at interior vertices.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Starting label for the free vertices; `None` picks a neutral default.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_sweeps: 100_000, initial: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PackingError {
    #[error("no convergence after {sweeps} sweeps, residual {residual:e}")]
    NoConvergence { sweeps: usize, residual: f64, label: Box<PackingLabel> },
    #[error("layout does not close up: tangency error {error:e}")]
    LayoutInconsistent { error: f64 },
    #[error("triangulation is not a closed disk")]
    NotADisk,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("no chains given")]
    EmptyChains,
}
