//! Byte-stable CSV, JSON and SVG output.
//!
//! Floats in CSV and JSON use 17 significant digits, SVG coordinates use 6 decimals, and
//! JSON object keys are sorted.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::{ConvergenceRow, ExperimentReport, PipelineError, RowReport, TrendCheck};
use crate::geom::Point;
use crate::mesh::io::{fmt_float, write_mesh_json};
use crate::mesh::Triangulation;
use crate::plmap::{CheckReport, LdcrEstimate};

pub const CHECKS_HEADER: [&str; 10] = ["check", "id_kind", "id", "m", "quantity", "lower", "value", "upper", "pass", "skipped"];
pub const LDCR_HEADER: [&str; 3] = ["m", "s_m", "m_s_m"];

/// A float as a JSON value that prints with 17 significant digits.
fn jf(x: f64) -> Value {
    if x.is_finite() {
        Value::String(fmt_float(x))
    } else {
        Value::String(x.to_string())
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| PipelineError::Io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn row_fields(r: &ConvergenceRow) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_float(r.eps),
        r.vertices.to_string(),
        r.sweeps.to_string(),
        r.m_k.to_string(),
        fmt_float(r.s_1),
        fmt_float(r.s_k),
        fmt_float(r.alpha),
        fmt_float(r.max_boundary_radius),
        fmt_float(r.length_area_ratio),
        fmt_float(r.error),
        fmt_float(r.fit_rms),
        fmt_float(r.max_dilatation),
        fmt_float(r.max_h),
        fmt_float(r.min_h),
        r.violations.to_string(),
        r.passed().to_string(),
    ]
}

/// The convergence table.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> Result<String, PipelineError> {
    csv_text(&ConvergenceRow::HEADER, rows.iter().map(row_fields))
}

/// Every row of every check, one line each.
pub fn checks_csv(checks: &[CheckReport]) -> Result<String, PipelineError> {
    let lines = checks.iter().flat_map(|c| {
        c.rows.iter().map(move |r| {
            vec![
                c.name.to_string(),
                c.id_kind.column().to_string(),
                r.id.to_string(),
                r.m.to_string(),
                r.quantity.to_string(),
                fmt_float(r.lower),
                fmt_float(r.value),
                fmt_float(r.upper),
                r.pass().to_string(),
                c.skipped.to_string(),
            ]
        })
    });
    csv_text(&CHECKS_HEADER, lines)
}

pub fn ldcr_csv(ldcr: &LdcrEstimate) -> Result<String, PipelineError> {
    let lines = ldcr
        .s
        .iter()
        .enumerate()
        .map(|(m, &s)| vec![m.to_string(), fmt_float(s), fmt_float(m as f64 * s)]);
    csv_text(&LDCR_HEADER, lines)
}

fn row_json(r: &ConvergenceRow) -> Value {
    let mut m = Map::new();
    for (k, v) in ConvergenceRow::HEADER.iter().zip(row_fields(r)) {
        m.insert(k.to_string(), Value::String(v));
    }
    Value::Object(m)
}

fn trend_json(t: &TrendCheck) -> Value {
    json!({
        "flagged": t.flagged,
        "n": t.n,
        "name": t.name,
        "passed": t.passed(),
        "values": t.values.iter().map(|&x| jf(x)).collect::<Vec<_>>(),
    })
}

/// Summary of the run: config, table, trends and overall verdict.
pub fn summary_json(report: &ExperimentReport) -> String {
    let v = json!({
        "config": serde_json::to_value(&report.config).expect("config serializes"),
        "passed": report.passed(),
        "rows": report.rows.iter().map(|r| row_json(&r.row)).collect::<Vec<_>>(),
        "trends": report.trends.iter().map(trend_json).collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s
}

/// Circles as SVG, optionally with the carrier edges, fitted to a square viewport.
pub fn packing_svg(centers: &[Point], radii: &[f64], edges: Option<&Triangulation>) -> String {
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for (c, r) in centers.iter().zip(radii) {
        lo = lo.inf(&(c - Point::new(*r, *r)));
        hi = hi.sup(&(c + Point::new(*r, *r)));
    }
    if centers.is_empty() {
        lo = Point::zeros();
        hi = Point::new(1.0, 1.0);
    }
    let pad = 0.02 * (hi - lo).max();
    let (x0, y0) = (lo.x - pad, lo.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke = 0.002 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.6} {:.6} {w:.6} {h:.6}\">",
        -(y0 + h)
    );
    // flip y so that the picture has the usual orientation
    let _ = writeln!(out, "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"{stroke:.6}\">");
    if let Some(t) = edges {
        let _ = writeln!(out, "<g stroke=\"#999999\">");
        for &[a, b] in t.edges() {
            let (p, q) = (centers[a], centers[b]);
            let _ = writeln!(out, "<line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\"/>", p.x, p.y, q.x, q.y);
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "<g stroke=\"#1f4e99\">");
    for (c, r) in centers.iter().zip(radii) {
        let _ = writeln!(out, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>", c.x, c.y, r);
    }
    out.push_str("</g>\n</g>\n</svg>\n");
    out
}

fn write(dir: &Path, name: &str, text: &str, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    out.push(p);
    Ok(())
}

fn write_row(dir: &Path, r: &RowReport, out: &mut Vec<PathBuf>) -> Result<(), PipelineError> {
    let sub = dir.join(format!("n{:03}", r.row.n));
    std::fs::create_dir_all(&sub)?;
    let t = &r.fill.triangulation;
    let domain_radii = vec![r.fill.radius; t.vertex_count()];
    write(&sub, "domain.json", &write_mesh_json(t, &r.fill.realization, Some(&domain_radii), None), out)?;
    write(&sub, "image.json", &write_mesh_json(t, &r.image.realization, Some(&r.image.radii), None), out)?;
    write(&sub, "domain.svg", &packing_svg(&r.fill.realization.positions, &domain_radii, Some(t)), out)?;
    write(&sub, "image.svg", &packing_svg(&r.image.realization.positions, &r.image.radii, Some(t)), out)?;
    write(&sub, "checks.csv", &checks_csv(&r.checks)?, out)?;
    write(&sub, "ldcr.csv", &ldcr_csv(&r.ldcr)?, out)?;
    Ok(())
}

/// Write the summary, the table and per-row artifacts under `dir`; returns the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    write(dir, "convergence.csv", &convergence_csv(&report.table())?, &mut out)?;
    write(dir, "summary.json", &summary_json(report), &mut out)?;
    for r in &report.rows {
        write_row(dir, r, &mut out)?;
    }
    Ok(out)
}
