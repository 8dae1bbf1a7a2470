use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::geom::Point;
use crate::mesh::Domain;

/// The region `Ω` of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk { center: [f64; 2], radius: f64 },
    /// The axis-aligned square of half side `half` about `center`.
    Square { center: [f64; 2], half: f64 },
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn unit_square() -> Self {
        DomainSpec::Square { center: [0.0, 0.0], half: 1.0 }
    }

    pub fn domain(&self) -> Domain {
        let p = |c: &[f64; 2]| Point::new(c[0], c[1]);
        match self {
            DomainSpec::Disk { center, radius } => Domain::Disk { center: p(center), radius: *radius },
            DomainSpec::Square { center, half } => {
                let c = p(center);
                Domain::Polygon(
                    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                        .iter()
                        .map(|&(x, y)| c + Point::new(x, y) * *half)
                        .collect(),
                )
            }
            DomainSpec::Ellipse { center, a, b } => Domain::Ellipse { center: p(center), a: *a, b: *b },
            DomainSpec::Polygon { vertices } => Domain::Polygon(vertices.iter().map(p).collect()),
        }
    }
}

/// Reference map used for the error column.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    /// The shipped oracle for the domain kind (disk, square, ellipse).
    #[default]
    Auto,
    /// A JSON array of `[zx, zy, wx, wy]` rows.
    Samples { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Interior angle-sum residual of the hyperbolic solve.
    pub solve: f64,
    /// Relative tangency error accepted by the layout, before its slack factor.
    pub layout: f64,
    /// Relative increase between consecutive rows tolerated by the trend checks.
    pub trend: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { solve: 1e-13, layout: 1e-10, trend: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    /// Circle counts per unit length; circles have radius `1/n`.
    pub n: Vec<usize>,
    pub anchor: [f64; 2],
    /// Probe set `K` as a polygon; `None` shrinks the domain toward the anchor by `probe_scale`.
    pub probe: Option<Vec<[f64; 2]>>,
    pub probe_scale: f64,
    pub tolerances: Tolerances,
    pub max_sweeps: usize,
    pub oracle: OracleSpec,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: DomainSpec::unit_disk(),
            n: vec![4, 8, 16, 32, 64],
            anchor: [0.0, 0.0],
            probe: None,
            probe_scale: 0.75,
            tolerances: Tolerances::default(),
            max_sweeps: 1_000_000,
            oracle: OracleSpec::Auto,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn anchor_point(&self) -> Point {
        Point::new(self.anchor[0], self.anchor[1])
    }

    /// The probe set `K`.
    pub fn probe_domain(&self) -> Domain {
        match &self.probe {
            Some(v) => Domain::Polygon(v.iter().map(|c| Point::new(c[0], c[1])).collect()),
            None => self.domain.domain().scaled(self.anchor_point(), self.probe_scale),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.n.is_empty() || self.n[0] == 0 || self.n.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n-sequence must be positive and strictly increasing");
        }
        let omega = self.domain.domain();
        if !omega.contains(&self.anchor_point()) {
            return bad("anchor must lie inside the domain");
        }
        match &self.probe {
            Some(v) => {
                if v.len() < 3 || v.iter().any(|c| !omega.contains(&Point::new(c[0], c[1]))) {
                    return bad("probe polygon must have at least 3 vertices, all inside the domain");
                }
            }
            None => {
                if !(self.probe_scale > 0.0 && self.probe_scale < 1.0) {
                    return bad("probe_scale must lie in (0, 1)");
                }
            }
        }
        let t = &self.tolerances;
        if !(t.solve > 0.0 && t.layout > 0.0 && t.trend >= 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}
