use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use discon_core::barycentric::{pullback_estimate, KarcherConfig, ModelSurface, Sphere};
use discon_core::mesh::io::{fmt_float, read_mesh_json, write_mesh_json, MeshFile};
use discon_core::mesh::{equilateral_torus, generations};
use discon_core::mobius::DiskAutomorphism;
use discon_core::packing::{layout, solve_euclidean, solve_maximal_hyperbolic, LAYOUT_SLACK};
use discon_core::pipeline::emit::{checks_csv, convergence_csv, packing_svg};
use discon_core::pipeline::{run_rodin_sullivan, run_row, ExperimentConfig, Oracle};
use discon_core::plmap::build_plmap;
use discon_core::structure::fullness;
use discon_core::vertexscale::{curvature, flatten};
use discon_core::{hex_fill, CurvatureTarget, EdgeLengths, Point, SolverConfig, Triangulation};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Command, Global, Target};

/// Checks that `diagnose` can run on a row of the experiment.
const ROW_CHECKS: [&str; 6] =
    ["h_sandwich", "edge_sandwich", "metric_sandwich", "ef_lipschitz", "length_area", "generation_lower_bound"];
/// Sphere triangle sizes of the pullback check, each half the previous one.
const PULLBACK_EPS: [f64; 3] = [0.4, 0.2, 0.1];
/// Accepted band for the deviation ratio under `ε → ε/2`.
const PULLBACK_RATIO: (f64, f64) = (3.2, 4.8);
/// Default Newton tolerance of `flatten`.
const FLATTEN_TOL: f64 = 1e-10;

/// Runs one subcommand; `Ok(false)` means a check failed.
pub fn run(g: &Global, cmd: &Command) -> Result<bool> {
    let cfg = load_config(g)?;
    match cmd {
        Command::Hexfill { n } => hexfill(g, &cfg, pick_n(&cfg, *n)),
        Command::Pack { mesh, n, boundary_radius } => pack(g, &cfg, mesh.as_deref(), pick_n(&cfg, *n), *boundary_radius),
        Command::Flatten { mesh, torus, perturb, target, corners, max_steps } => {
            let (t, l) = match (mesh, torus) {
                (Some(path), _) => mesh_lengths(&read_mesh(path)?)?,
                (None, Some((nx, ny))) => perturbed_torus(*nx, *ny, *perturb, g.seed)?,
                (None, None) => bail!("flatten needs --mesh or --torus"),
            };
            flatten_cmd(g, &t, &l, *target, *corners, *max_steps)
        }
        Command::Map { n, at } => map(g, &cfg, pick_n(&cfg, *n), at),
        Command::Diagnose { n, checks, grid } => diagnose(g, &cfg, pick_n(&cfg, *n), checks, *grid),
        Command::Converge => converge(g, &cfg),
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = g.tol {
        cfg.tolerances.solve = t;
    }
    if let Some(s) = g.max_sweeps {
        cfg.max_sweeps = s;
    }
    if g.out.is_some() {
        cfg.out_dir.clone_from(&g.out);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `n` from the flag, else the largest of the configuration.
fn pick_n(cfg: &ExperimentConfig, n: Option<usize>) -> usize {
    n.unwrap_or_else(|| *cfg.n.last().expect("validated n-sequence is nonempty"))
}

fn solver(cfg: &ExperimentConfig) -> SolverConfig {
    SolverConfig { tol: cfg.tolerances.solve, max_sweeps: cfg.max_sweeps, initial: None }
}

fn read_mesh(path: &Path) -> Result<MeshFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_mesh_json(&text)?)
}

/// Writes `files` under `--out`, or prints the first one to stdout.
fn deliver(g: &Global, files: &[(&str, String)]) -> Result<()> {
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, body) in files {
                let p = dir.join(name);
                std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
                eprintln!("wrote {}", p.display());
            }
        }
        None => stdout(&files[0].1)?,
    }
    Ok(())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn verdict(name: &str, pass: bool, detail: String) -> bool {
    eprintln!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn hexfill(g: &Global, cfg: &ExperimentConfig, n: usize) -> Result<bool> {
    let fill = hex_fill(&cfg.domain.domain(), n, cfg.anchor_point())?;
    let t = &fill.triangulation;
    let radii = vec![fill.radius; t.vertex_count()];
    deliver(
        g,
        &[
            ("mesh.json", write_mesh_json(t, &fill.realization, Some(&radii), None)),
            ("mesh.svg", packing_svg(&fill.realization.positions, &radii, Some(t))),
        ],
    )?;
    let valid = fill.realization.validate(t).is_ok() && t.is_disk();
    let detail = format!("{} vertices, {} triangles, anchor {}", t.vertex_count(), t.triangles().len(), fill.anchor_vertex);
    Ok(verdict("hexfill", valid, detail))
}

/// The interior vertex of largest generation, lowest index on ties.
fn deepest_vertex(t: &Triangulation) -> Result<usize> {
    let gen = generations(t);
    t.interior_vertices()
        .into_iter()
        .max_by(|&a, &b| gen[a].cmp(&gen[b]).then(b.cmp(&a)))
        .context("mesh has no interior vertex")
}

/// The neighbor of `anchor` whose direction has the smallest `|arg|`; the first neighbor
/// when the mesh carries no positions.
fn anchor_neighbor(t: &Triangulation, pos: &[Point], anchor: usize) -> usize {
    let nb = t.neighbors(anchor);
    if pos.len() != t.vertex_count() {
        return nb[0];
    }
    let key = |w: usize| {
        let d = pos[w] - pos[anchor];
        d.y.atan2(d.x).abs()
    };
    *nb.iter().min_by(|&&a, &&b| key(a).total_cmp(&key(b)).then(a.cmp(&b))).expect("interior vertex has neighbors")
}

fn pack(g: &Global, cfg: &ExperimentConfig, mesh: Option<&Path>, n: usize, boundary_radius: Option<f64>) -> Result<bool> {
    let (t, pos, anchor) = match mesh {
        Some(p) => {
            let m = read_mesh(p)?;
            let a = deepest_vertex(&m.triangulation)?;
            (m.triangulation, m.realization.positions, a)
        }
        None => {
            let fill = hex_fill(&cfg.domain.domain(), n, cfg.anchor_point())?;
            (fill.triangulation, fill.realization.positions, fill.anchor_vertex)
        }
    };
    let sc = solver(cfg);
    let (label, stats) = match boundary_radius {
        Some(r) => solve_euclidean(&t, &vec![r; t.boundary_vertices().len()], &sc)?,
        None => solve_maximal_hyperbolic(&t, &sc)?,
    };
    let lay = layout(&t, &label, anchor, anchor_neighbor(&t, &pos, anchor), cfg.tolerances.layout)?;
    deliver(
        g,
        &[
            ("layout.json", write_mesh_json(&t, &lay.realization, Some(&lay.radii), None)),
            ("layout.svg", packing_svg(&lay.realization.positions, &lay.radii, Some(&t))),
        ],
    )?;
    let tangency = lay.tangency_error(&t);
    let mut pass = verdict(
        "angle_sums",
        stats.residual <= sc.tol,
        format!("residual {:.3e} after {} sweeps (tol {:.1e})", stats.residual, stats.sweeps, sc.tol),
    );
    pass &= verdict(
        "tangency",
        tangency <= LAYOUT_SLACK * cfg.tolerances.layout,
        format!("relative error {tangency:.3e}"),
    );
    if boundary_radius.is_none() {
        let horo = lay.horocycle_error(&t.boundary_vertices());
        pass &= verdict("horocycles", horo <= LAYOUT_SLACK * cfg.tolerances.layout, format!("error {horo:.3e}"));
    }
    Ok(pass)
}

/// Edge lengths from the file, or from vertex positions when none are stored.
fn mesh_lengths(m: &MeshFile) -> Result<(Triangulation, EdgeLengths)> {
    let t = m.triangulation.clone();
    let ell = match &m.edge_lengths {
        Some(l) => l.clone(),
        None => {
            let p = &m.realization.positions;
            if p.len() != t.vertex_count() {
                bail!("mesh has neither edge_lengths nor vertices");
            }
            t.edges().iter().map(|&[a, b]| (p[a] - p[b]).norm()).collect()
        }
    };
    Ok((t, EdgeLengths { ell }))
}

/// An equilateral torus with every length scaled by an independent factor in `1 ± perturb`.
fn perturbed_torus(nx: usize, ny: usize, perturb: f64, seed: u64) -> Result<(Triangulation, EdgeLengths)> {
    if !(0.0..0.5).contains(&perturb) {
        bail!("--perturb must lie in [0, 0.5)");
    }
    let torus = equilateral_torus(nx, ny)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ell = torus.lengths.iter().map(|l| l * (1.0 + perturb * rng.random_range(-1.0..=1.0))).collect();
    Ok((torus.triangulation, EdgeLengths { ell }))
}

fn float_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(",")
}

fn flatten_cmd(
    g: &Global,
    t: &Triangulation,
    l: &EdgeLengths,
    target: Target,
    corners: Option<[usize; 3]>,
    max_steps: usize,
) -> Result<bool> {
    let target = match target {
        Target::FlatTorus => CurvatureTarget::flat_torus(t)?,
        Target::Triangle => CurvatureTarget::triangle(t, corners.context("--corners is required for the triangle target")?)?,
    };
    let tol = g.tol.unwrap_or(FLATTEN_TOL);
    let res = flatten(t, l, &target, tol, max_steps)?;
    let factors = format!(
        "{{\"edge_lengths\":[{}],\n\"f\":[{}],\n\"newton_steps\":{},\n\"residual\":{},\n\"w\":[{}]}}\n",
        float_list(&res.lengths.ell),
        float_list(&res.factors.f),
        res.newton_steps,
        fmt_float(res.residual),
        float_list(&res.w),
    );
    let k = curvature(t, &res.lengths)?.curvature;
    let mut report = String::from("vertex,target,curvature,abs_error\n");
    for (v, (want, got)) in target.k.iter().zip(&k).enumerate() {
        let _ = writeln!(report, "{v},{},{},{}", fmt_float(*want), fmt_float(*got), fmt_float((want - got).abs()));
    }
    deliver(g, &[("factors.json", factors), ("residual.csv", report)])?;
    Ok(verdict(
        "flatten",
        res.residual <= tol,
        format!("max |K - target| {:.3e} after {} Newton steps (tol {tol:.1e})", res.residual, res.newton_steps),
    ))
}

fn map(g: &Global, cfg: &ExperimentConfig, n: usize, at: &[[f64; 2]]) -> Result<bool> {
    let oracle = Oracle::for_domain(&cfg.domain, &cfg.oracle)?;
    let row = run_row(cfg, &oracle, n)?;
    let pl = build_plmap(&row.fill.triangulation, &row.fill.realization, &row.image.realization)?;
    let fit: &DiskAutomorphism = &row.fit.map;
    let mut points = String::from("x,y,phi_x,phi_y,normalized_x,normalized_y\n");
    for p in at {
        let z = Point::new(p[0], p[1]);
        let w = pl.evaluate(&z).with_context(|| format!("({}, {}) is outside the carrier", p[0], p[1]))?;
        let m = fit.apply_point(&w);
        let _ = writeln!(points, "{}", float_list(&[z.x, z.y, w.x, w.y, m.x, m.y]));
    }
    let mut files = vec![
        ("convergence.csv", convergence_csv(std::slice::from_ref(&row.row))?),
        ("checks.csv", checks_csv(&row.checks)?),
        ("image.json", write_mesh_json(&row.fill.triangulation, &row.image.realization, Some(&row.image.radii), None)),
    ];
    if !at.is_empty() {
        files.insert(0, ("points.csv", points));
    }
    deliver(g, &files)?;
    let r = &row.row;
    Ok(verdict(
        "map",
        r.passed(),
        format!("n = {n}: error {:.4e}, max dilatation {:.4}, {} check violations", r.error, r.max_dilatation, r.violations),
    ))
}

/// Sphere triangles of shrinking size about the north pole, with the deviation ratio
/// between consecutive sizes.
fn pullback_report(grid: usize) -> Result<(String, bool)> {
    if grid < 3 {
        bail!("--grid must be at least 3");
    }
    let s = Sphere { rho: 1.0 };
    let north = Vector3::z();
    let shape = [Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.3, 0.9, 0.0)];
    let cfg = KarcherConfig::default();
    let h = 1.0 / (8.0 * grid as f64);
    let mut out = String::from("eps,theta,max_dev,empirical_beta\n");
    let mut devs = Vec::new();
    for eps in PULLBACK_EPS {
        let [a, b, c] = shape.map(|v| s.exp(&north, &(v * eps)));
        let pts = [a?, b?, c?];
        let rep = pullback_estimate(&s, &pts, grid, h, &cfg)?;
        let d = |i: usize, j: usize| s.distance(&pts[i], &pts[j]);
        let theta = fullness(d(0, 1)?, d(0, 2)?, d(1, 2)?, rep.eps)?;
        let _ = writeln!(out, "{}", float_list(&[rep.eps, theta, rep.max_dev, rep.beta]));
        devs.push(rep.max_dev);
    }
    let ratios: Vec<f64> = devs.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|r| (PULLBACK_RATIO.0..=PULLBACK_RATIO.1).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    verdict("pullback", pass, format!("deviation ratios under eps -> eps/2: {}", shown.join(", ")));
    Ok((out, pass))
}

fn diagnose(g: &Global, cfg: &ExperimentConfig, n: usize, names: &[String], grid: usize) -> Result<bool> {
    let selected: Vec<&str> = if names.is_empty() {
        ROW_CHECKS.iter().copied().chain(["pullback"]).collect()
    } else {
        names.iter().map(String::as_str).collect()
    };
    if let Some(bad) = selected.iter().find(|s| **s != "pullback" && !ROW_CHECKS.contains(s)) {
        bail!("unknown check {bad:?}; known: {}, pullback", ROW_CHECKS.join(", "));
    }
    let mut pass = true;
    let mut files = Vec::new();
    if selected.iter().any(|s| ROW_CHECKS.contains(s)) {
        let row = run_row(cfg, &Oracle::for_domain(&cfg.domain, &cfg.oracle)?, n)?;
        let chosen: Vec<_> = row.checks.into_iter().filter(|c| selected.contains(&c.name)).collect();
        for c in &chosen {
            let detail = format!("{} rows, {} violations, {} skipped", c.rows.len(), c.violations().len(), c.skipped);
            pass &= verdict(c.name, c.passed(), detail);
        }
        files.push(("checks.csv", checks_csv(&chosen)?));
    }
    if selected.contains(&"pullback") {
        let (csv, ok) = pullback_report(grid)?;
        pass &= ok;
        files.push(("pullback.csv", csv));
    }
    match &g.out {
        Some(_) => deliver(g, &files)?,
        None => files.iter().try_for_each(|(_, body)| stdout(body))?,
    }
    Ok(pass)
}

fn converge(g: &Global, cfg: &ExperimentConfig) -> Result<bool> {
    let report = run_rodin_sullivan(cfg)?;
    stdout(&convergence_csv(&report.table())?)?;
    if let Some(dir) = g.out.as_ref().or(cfg.out_dir.as_ref()) {
        let files = report.emit(dir)?;
        eprintln!("wrote {} files under {}", files.len(), dir.display());
    }
    for t in &report.trends {
        let vals: Vec<String> = t.values.iter().map(|v| format!("{v:.4e}")).collect();
        verdict(t.name, t.passed(), format!("[{}], flagged {:?}", vals.join(", "), t.flagged));
    }
    for r in &report.rows {
        verdict(&format!("row n = {}", r.row.n), r.row.passed(), format!("{} violations", r.row.violations));
    }
    Ok(report.passed())
}
