//! Reference conformal maps onto the unit disk.

use num_complex::Complex64;
use serde::Deserialize;

use super::{DomainSpec, OracleSpec, PipelineError};
use crate::geom::Point;
use crate::mobius::{to_c, to_p};

const SQUARE_FIXTURE: &str = include_str!("../../fixtures/square_oracle.json");
const ELLIPSE_FIXTURE: &str = include_str!("../../fixtures/ellipse_oracle.json");

/// Relative tolerance when matching a domain against a fixture's shape.
const SHAPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Deserialize)]
struct SeriesSpec {
    stride: u32,
    offset: u32,
    coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct Fixture {
    series: SeriesSpec,
    valid_radius: f64,
    #[serde(default)]
    semi_axes: Option<[f64; 2]>,
    interior_samples: Vec<[f64; 4]>,
    boundary_samples: Vec<[f64; 4]>,
}

/// An odd-symmetric power series `Σ c_k z^{offset + stride·k}` in normalized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub stride: u32,
    pub offset: u32,
    pub coefficients: Vec<f64>,
    /// Largest `|z|` at which the series is trusted.
    pub valid_radius: f64,
}

impl Series {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let step = z.powu(self.stride);
        let acc = self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * step + c);
        acc * z.powu(self.offset)
    }
}

/// A reference map `Ω → 𝔻`.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    /// `z ↦ (z − center)/scale` followed by the series (identity when `None`).
    Analytic { center: Point, scale: f64, series: Option<Series> },
    /// Tabulated `(z, w)` pairs; only these points can be probed.
    Samples(Vec<(Point, Point)>),
}

impl Oracle {
    /// The shipped oracle for the domain, or a loaded sample file.
    pub fn for_domain(domain: &DomainSpec, spec: &OracleSpec) -> Result<Self, PipelineError> {
        if let OracleSpec::Samples { path } = spec {
            let text = std::fs::read_to_string(path)?;
            return Self::from_samples_json(&text);
        }
        let unsupported = |why: &str| {
            PipelineError::UnsupportedDomain(format!(
                "{why}; supply a sample file with oracle {{\"kind\": \"samples\", \"path\": ...}}"
            ))
        };
        match domain {
            DomainSpec::Disk { center, radius } => {
                Ok(Oracle::Analytic { center: Point::new(center[0], center[1]), scale: *radius, series: None })
            }
            DomainSpec::Square { center, half } => {
                let (series, _) = square_fixture();
                Ok(Oracle::Analytic { center: Point::new(center[0], center[1]), scale: *half, series: Some(series) })
            }
            DomainSpec::Ellipse { center, a, b } => {
                let (series, fix) = ellipse_fixture();
                let [fa, fb] = fix.semi_axes.expect("ellipse fixture lists its semi-axes");
                if ((b / a) - fb / fa).abs() > SHAPE_TOL * (fb / fa) {
                    return Err(unsupported(&format!("no shipped oracle for an ellipse with axis ratio {}", b / a)));
                }
                Ok(Oracle::Analytic { center: Point::new(center[0], center[1]), scale: a / fa, series: Some(series) })
            }
            DomainSpec::Polygon { .. } => Err(unsupported("no shipped oracle for a general polygon")),
        }
    }

    pub fn from_samples_json(text: &str) -> Result<Self, PipelineError> {
        let rows: Vec<[f64; 4]> =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("oracle samples: {e}")))?;
        Ok(Oracle::Samples(rows.iter().map(|r| (Point::new(r[0], r[1]), Point::new(r[2], r[3]))).collect()))
    }

    /// The oracle value at `p`, or `None` where the oracle is not defined.
    pub fn eval(&self, p: &Point) -> Option<Point> {
        match self {
            Oracle::Analytic { center, scale, series } => {
                let z = to_c(&((p - center) / *scale));
                match series {
                    None => Some(to_p(z)),
                    Some(s) if z.norm() <= s.valid_radius => Some(to_p(s.eval(z))),
                    Some(_) => None,
                }
            }
            Oracle::Samples(rows) => rows.iter().find(|(z, _)| z == p).map(|(_, w)| *w),
        }
    }

    /// Points at which the error is measured: `vertices` for analytic oracles, the sample
    /// points accepted by `keep` otherwise.
    pub fn probe_points(&self, vertices: &[Point], keep: impl Fn(&Point) -> bool) -> Vec<(Point, Point)> {
        match self {
            Oracle::Analytic { .. } => vertices.iter().filter_map(|p| self.eval(p).map(|w| (*p, w))).collect(),
            Oracle::Samples(rows) => rows.iter().copied().filter(|(z, _)| keep(z)).collect(),
        }
    }
}

/// Reference values at `points`; fails on points the oracle does not cover.
pub fn conformal_oracle(domain: &DomainSpec, spec: &OracleSpec, points: &[Point]) -> Result<Vec<Point>, PipelineError> {
    let oracle = Oracle::for_domain(domain, spec)?;
    points
        .iter()
        .map(|p| {
            oracle
                .eval(p)
                .ok_or_else(|| PipelineError::UnsupportedDomain(format!("oracle undefined at ({}, {})", p.x, p.y)))
        })
        .collect()
}

fn parse_fixture(text: &str) -> (Series, Fixture) {
    let fix: Fixture = serde_json::from_str(text).expect("shipped fixture parses");
    let series = Series {
        stride: fix.series.stride,
        offset: fix.series.offset,
        coefficients: fix.series.coefficients.clone(),
        valid_radius: fix.valid_radius,
    };
    (series, fix)
}

fn square_fixture() -> (Series, Fixture) {
    parse_fixture(SQUARE_FIXTURE)
}

fn ellipse_fixture() -> (Series, Fixture) {
    parse_fixture(ELLIPSE_FIXTURE)
}

/// Sample tables shipped with the fixtures: `(interior, boundary)` rows `[zx, zy, wx, wy]`.
pub fn fixture_samples(kind: &str) -> Option<(Vec<[f64; 4]>, Vec<[f64; 4]>)> {
    let (_, fix) = match kind {
        "square" => square_fixture(),
        "ellipse" => ellipse_fixture(),
        _ => return None,
    };
    Some((fix.interior_samples, fix.boundary_samples))
}
