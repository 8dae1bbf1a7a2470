//! The Rodin–Sullivan experiment: hexagonal packings of radius `1/n` in a planar domain,
//! their maximal packings in the unit disk, and the convergence of the resulting PL maps to
//! the Riemann map, with every per-row estimate checked along the way.

mod config;
pub mod emit;
mod oracle;

use std::path::Path;

use thiserror::Error;

pub use config::{DomainSpec, ExperimentConfig, OracleSpec, Tolerances};
pub use oracle::{conformal_oracle, fixture_samples, Oracle, Series};

use crate::geom::Point;
use crate::mesh::{generations, hex_fill, HexFill, PlanarRealization, Triangulation};
use crate::mobius::{fit_disk_automorphism, to_c, DiskAutomorphism, MobiusFit};
use crate::packing::{boundary_rings, layout, length_area_bound, schwarz_ratio_report, solve_maximal_hyperbolic};
use crate::packing::{Layout, SolverConfig};
use crate::plmap::{
    build_plmap, edge_sandwich_check, ef_lipschitz_check, estimate_ldcr, generation_lower_bound_check,
    h_sandwich_check, metric_sandwich_check, CheckReport, CheckRow, IdKind, InterpolatedFactor, LdcrEstimate, PLMap,
    RatioField,
};
use crate::structure::{ConformalFactors, ConformalStructure};

/// Fullness of the equilateral triangles of a hexagonal carrier.
pub const HEX_FULLNESS: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage} failed at n = {n}: {message}")]
    Stage { stage: &'static str, n: usize, message: String },
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn stage<E: std::fmt::Display>(stage: &'static str, n: usize) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage { stage, n, message: e.to_string() }
}

/// One line of the convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Edge length `2/n` of the domain packing.
    pub eps: f64,
    pub vertices: usize,
    pub sweeps: usize,
    /// Smallest generation of a vertex in `K`.
    pub m_k: usize,
    pub s_1: f64,
    /// `s_m` at `m = m_k`.
    pub s_k: f64,
    /// `max_m m·s_m`.
    pub alpha: f64,
    pub max_boundary_radius: f64,
    /// Largest `radius / Length-Area bound` over boundary circles.
    pub length_area_ratio: f64,
    /// Post-fit `max |M(φ_n(z)) − oracle(z)|` over the probe points.
    pub error: f64,
    pub fit_rms: f64,
    pub max_dilatation: f64,
    pub max_h: f64,
    pub min_h: f64,
    /// Rows that fail, over all checks of the row.
    pub violations: usize,
}

impl ConvergenceRow {
    pub const HEADER: [&'static str; 17] = [
        "n",
        "eps",
        "vertices",
        "sweeps",
        "m_k",
        "s_1",
        "s_k",
        "alpha",
        "max_boundary_radius",
        "length_area_ratio",
        "error",
        "fit_rms",
        "max_dilatation",
        "max_h",
        "min_h",
        "violations",
        "checks_passed",
    ];

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Everything computed for one `n`.
#[derive(Debug, Clone)]
pub struct RowReport {
    pub row: ConvergenceRow,
    pub fill: HexFill,
    pub image: Layout,
    pub ldcr: LdcrEstimate,
    pub fit: MobiusFit,
    pub checks: Vec<CheckReport>,
}

/// Ceiling on `max_m m·s_m` for a run to count as proper.
pub const PROPERNESS_BOUND: f64 = 1.0;

/// A trend check over the rows whose probe set avoids generation 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendCheck {
    pub name: &'static str,
    /// `n` of each checked row.
    pub n: Vec<usize>,
    pub values: Vec<f64>,
    /// Positions in `values` that break the trend.
    pub flagged: Vec<usize>,
}

impl TrendCheck {
    /// Flags `i` with `values[i] > (1 + tol)·values[i − 1]`.
    pub fn non_increasing(name: &'static str, n: Vec<usize>, values: Vec<f64>, tol: f64) -> Self {
        let flagged = (1..values.len()).filter(|&i| values[i] > (1.0 + tol) * values[i - 1]).collect();
        TrendCheck { name, n, values, flagged }
    }

    /// Flags `i` with `values[i] > cap`, or whose increase exceeds the previous increase.
    pub fn bounded(name: &'static str, n: Vec<usize>, values: Vec<f64>, cap: f64) -> Self {
        let step = |i: usize| values[i] - values[i - 1];
        let flagged = (0..values.len())
            .filter(|&i| values[i] > cap || (i >= 2 && step(i) > 0.0 && step(i) > step(i - 1).max(0.0)))
            .collect();
        TrendCheck { name, n, values, flagged }
    }

    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<RowReport>,
    pub trends: Vec<TrendCheck>,
}

impl ExperimentReport {
    pub fn table(&self) -> Vec<ConvergenceRow> {
        self.rows.iter().map(|r| r.row.clone()).collect()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.row.passed()) && self.trends.iter().all(TrendCheck::passed)
    }

    /// Write every artifact under `dir`.
    pub fn emit(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, PipelineError> {
        emit::write_report(self, dir)
    }
}

/// The anchor neighbor whose direction has the smallest `|arg|`, lowest index on ties.
fn anchor_neighbor(t: &Triangulation, pos: &[Point], anchor: usize) -> usize {
    let key = |w: usize| {
        let d = pos[w] - pos[anchor];
        d.y.atan2(d.x).abs()
    };
    *t.neighbors(anchor)
        .iter()
        .min_by(|&&a, &&b| key(a).total_cmp(&key(b)).then(a.cmp(&b)))
        .expect("anchor is interior")
}

/// `boundary circle radius / Length-Area bound` over boundary circles that have at least one
/// separating ring.
fn length_area_report(t: &Triangulation, image: &Layout, anchor: usize, n: usize) -> Result<CheckReport, PipelineError> {
    let mut rep = CheckReport {
        name: "length_area",
        id_kind: IdKind::Vertex,
        rows: Vec::new(),
        skipped: 0,
    };
    for b in t.boundary_vertices() {
        let rings = boundary_rings(t, b, anchor);
        if rings.is_empty() {
            rep.skipped += 1;
            continue;
        }
        let bound = length_area_bound(&rings).map_err(stage("length_area", n))?;
        rep.rows.push(CheckRow {
            id: b,
            m: rings.len(),
            quantity: "radius",
            lower: 0.0,
            value: image.radii[b],
            upper: bound,
        });
    }
    Ok(rep)
}

/// Run one row of the experiment.
pub fn run_row(cfg: &ExperimentConfig, oracle: &Oracle, n: usize) -> Result<RowReport, PipelineError> {
    let omega = cfg.domain.domain();
    let k_set = cfg.probe_domain();
    let fill = hex_fill(&omega, n, cfg.anchor_point()).map_err(stage("hex_fill", n))?;
    let t = &fill.triangulation;
    let dom = &fill.realization;
    let anchor = fill.anchor_vertex;
    let eps = 2.0 * fill.radius;

    let solver = SolverConfig { tol: cfg.tolerances.solve, max_sweeps: cfg.max_sweeps, initial: None };
    let (label, stats) = solve_maximal_hyperbolic(t, &solver).map_err(stage("solve_maximal_hyperbolic", n))?;
    let nb = anchor_neighbor(t, &dom.positions, anchor);
    let image = layout(t, &label, anchor, nb, cfg.tolerances.layout).map_err(stage("layout", n))?;
    let map = build_plmap(t, dom, &image.realization).map_err(stage("build_plmap", n))?;

    let domain_radii = vec![fill.radius; t.vertex_count()];
    let f = ConformalFactors::from_radii(&domain_radii);
    let f_tilde = ConformalFactors::from_radii(&image.radii);
    let rf = RatioField::from_radii(&domain_radii, &image.radii);
    let ef = InterpolatedFactor::new(&rf);
    let ldcr = estimate_ldcr(t, &f, &f_tilde);

    let k_vertices: Vec<usize> = (0..t.vertex_count()).filter(|&v| k_set.contains(&dom.positions[v])).collect();
    if k_vertices.is_empty() {
        return Err(PipelineError::Stage { stage: "probe", n, message: "no vertex lies in K".into() });
    }
    let mut in_k = vec![false; t.vertex_count()];
    k_vertices.iter().for_each(|&v| in_k[v] = true);
    let k_triangles: Vec<usize> =
        (0..t.triangles().len()).filter(|&k| t.triangles()[k].iter().all(|&v| in_k[v])).collect();
    let gen = generations(t);
    let m_k = k_vertices.iter().map(|&v| gen[v]).min().expect("nonempty");

    let s = ConformalStructure::circle_packing(t);
    let mut checks = vec![
        h_sandwich_check(t, &rf, &ldcr),
        edge_sandwich_check(t, &s, &f, &f_tilde, &ldcr).map_err(stage("edge_sandwich_check", n))?,
        metric_sandwich_check(&map, &ef, HEX_FULLNESS, &ldcr, &k_triangles),
        ef_lipschitz_check(&map, &ef, ldcr.alpha(), HEX_FULLNESS, eps, &k_triangles),
        length_area_report(t, &image, anchor, n)?,
    ];
    let ball = k_vertices
        .iter()
        .filter_map(|&v| omega.boundary_distance(&dom.positions[v]))
        .fold(f64::INFINITY, f64::min);
    checks.push(generation_lower_bound_check(t, dom, &k_vertices, 0.5 * ball, eps));

    let schwarz = schwarz_ratio_report(&domain_radii, &image.radii, &k_vertices);
    let max_dilatation = k_triangles.iter().map(|&k| map.dilatation(k)).fold(1.0, f64::max);
    let max_boundary_radius = t.boundary_vertices().iter().map(|&b| image.radii[b]).fold(0.0, f64::max);
    let length_area_ratio = checks[4].rows.iter().map(|r| r.value / r.upper).fold(0.0, f64::max);

    let fit = fit_row(oracle, &map, dom, &k_vertices, &k_set, anchor, n)?;
    let violations = checks.iter().map(|c| c.violations().len()).sum();
    let row = ConvergenceRow {
        n,
        eps,
        vertices: t.vertex_count(),
        sweeps: stats.sweeps,
        m_k,
        s_1: ldcr.at(1),
        s_k: ldcr.at(m_k),
        alpha: ldcr.alpha(),
        max_boundary_radius,
        length_area_ratio,
        error: fit.max,
        fit_rms: fit.rms,
        max_dilatation,
        max_h: schwarz.max,
        min_h: schwarz.min,
        violations,
    };
    Ok(RowReport { row, fill, image, ldcr, fit, checks })
}

/// Fit a disk automorphism `M` with `M(φ_n(z)) ≈ oracle(z)` over the probe points, starting
/// from the map that sends the anchor image to the anchor's oracle value.
fn fit_row(
    oracle: &Oracle,
    map: &PLMap,
    dom: &PlanarRealization,
    k_vertices: &[usize],
    k_set: &crate::mesh::Domain,
    anchor: usize,
    n: usize,
) -> Result<MobiusFit, PipelineError> {
    let verts: Vec<Point> = k_vertices.iter().map(|&v| dom.positions[v]).collect();
    let probes = oracle.probe_points(&verts, |p| k_set.contains(p) && map.locate(p).is_some());
    if probes.is_empty() {
        return Err(PipelineError::Stage { stage: "oracle", n, message: "no oracle values on K".into() });
    }
    let mut src = Vec::with_capacity(probes.len());
    for (z, _) in &probes {
        src.push(map.evaluate(z).map_err(stage("oracle", n))?);
    }
    let dst: Vec<Point> = probes.iter().map(|p| p.1).collect();
    let w0 = match oracle.eval(&dom.positions[anchor]) {
        Some(w) => to_c(&w),
        None => num_complex::Complex64::new(0.0, 0.0),
    };
    Ok(fit_disk_automorphism(&src, &dst, DiskAutomorphism { theta: 0.0, a: -w0 }))
}

/// Run every row of the experiment and the trend checks across rows.
pub fn run_rodin_sullivan(cfg: &ExperimentConfig) -> Result<ExperimentReport, PipelineError> {
    cfg.validate()?;
    let oracle = Oracle::for_domain(&cfg.domain, &cfg.oracle)?;
    let rows = cfg.n.iter().map(|&n| run_row(cfg, &oracle, n)).collect::<Result<Vec<_>, _>>()?;
    let tol = cfg.tolerances.trend;
    let asymptotic: Vec<&ConvergenceRow> = rows.iter().map(|r| &r.row).filter(|r| r.m_k >= 1).collect();
    let ns: Vec<usize> = asymptotic.iter().map(|r| r.n).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| asymptotic.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let trends = vec![
        TrendCheck::non_increasing("error", ns.clone(), col(|r| r.error), tol),
        TrendCheck::non_increasing("max_boundary_radius", ns.clone(), col(|r| r.max_boundary_radius), tol),
        TrendCheck::non_increasing("max_dilatation_minus_1", ns.clone(), col(|r| r.max_dilatation - 1.0), tol),
        TrendCheck::non_increasing("max_h", ns.clone(), col(|r| r.max_h), tol),
        TrendCheck::bounded("alpha", ns, col(|r| r.alpha), PROPERNESS_BOUND),
    ];
    Ok(ExperimentReport { config: cfg.clone(), rows, trends })
}
