//! Mesh and layout JSON.
//!
//! Output is written by hand so that it is byte-stable: keys are sorted and every
//! float uses 17 significant digits.

use std::fmt::Write as _;

use serde_json::Value;

use super::{Geometry, MeshError, PlanarRealization, Triangulation};
use crate::geom::Point;

/// Round-trippable float text with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A parsed mesh or layout file.
#[derive(Debug, Clone)]
pub struct MeshFile {
    pub triangulation: Triangulation,
    pub realization: PlanarRealization,
    pub radii: Option<Vec<f64>>,
    /// Per-edge lengths in canonical edge order, for surfaces without a planar realization.
    pub edge_lengths: Option<Vec<f64>>,
}

fn float_array(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_float(*x));
    }
    out.push(']');
}

/// Serialize a mesh, optionally with radii (layout file) and edge lengths.
pub fn write_mesh_json(
    t: &Triangulation,
    r: &PlanarRealization,
    radii: Option<&[f64]>,
    edge_lengths: Option<&[f64]>,
) -> String {
    let mut out = String::from("{");
    if let Some(l) = edge_lengths {
        out.push_str("\"edge_lengths\":");
        float_array(&mut out, l);
        out.push_str(",\n");
    }
    let _ = writeln!(out, "\"geometry\":\"{}\",", r.geometry.as_str());
    if let Some(rad) = radii {
        out.push_str("\"radii\":");
        float_array(&mut out, rad);
        out.push_str(",\n");
    }
    out.push_str("\"triangles\":[");
    for (i, tri) in t.triangles().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "[{},{},{}]", tri[0], tri[1], tri[2]);
    }
    out.push_str("],\n\"vertices\":[");
    for (i, p) in r.positions.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "[{},{}]", fmt_float(p.x), fmt_float(p.y));
    }
    out.push_str("]}\n");
    out
}

fn parse_floats(v: &Value, what: &str) -> Result<Vec<f64>, MeshError> {
    v.as_array()
        .ok_or_else(|| MeshError::Parse(format!("{what} must be an array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| MeshError::Parse(format!("{what} entries must be numbers"))))
        .collect()
}

pub fn read_mesh_json(text: &str) -> Result<MeshFile, MeshError> {
    let v: Value = serde_json::from_str(text).map_err(|e| MeshError::Parse(e.to_string()))?;
    let geometry = match v.get("geometry").and_then(Value::as_str).unwrap_or("euclidean") {
        "euclidean" => Geometry::Euclidean,
        "poincare" => Geometry::Poincare,
        other => return Err(MeshError::Parse(format!("unknown geometry {other:?}"))),
    };
    let tris = v
        .get("triangles")
        .and_then(Value::as_array)
        .ok_or_else(|| MeshError::Parse("missing \"triangles\"".into()))?
        .iter()
        .map(|t| {
            let a = t.as_array().filter(|a| a.len() == 3);
            let a = a.ok_or_else(|| MeshError::Parse("triangles must be triples".into()))?;
            let mut out = [0usize; 3];
            for (o, x) in out.iter_mut().zip(a) {
                *o = x.as_u64().ok_or_else(|| MeshError::Parse("vertex ids must be integers".into()))? as usize;
            }
            Ok(out)
        })
        .collect::<Result<Vec<[usize; 3]>, MeshError>>()?;
    let positions = match v.get("vertices") {
        Some(Value::Array(vs)) => vs
            .iter()
            .map(|p| {
                let xy = parse_floats(p, "vertex")?;
                if xy.len() != 2 {
                    return Err(MeshError::Parse("vertices must be [x, y] pairs".into()));
                }
                Ok(Point::new(xy[0], xy[1]))
            })
            .collect::<Result<Vec<Point>, MeshError>>()?,
        None => Vec::new(),
        Some(_) => return Err(MeshError::Parse("\"vertices\" must be an array".into())),
    };
    let vertex_count = if positions.is_empty() {
        tris.iter().flat_map(|t| t.iter()).max().map_or(0, |m| m + 1)
    } else {
        positions.len()
    };
    let triangulation = Triangulation::new(vertex_count, &tris)?;
    let radii = v.get("radii").map(|r| parse_floats(r, "radii")).transpose()?;
    let edge_lengths = v.get("edge_lengths").map(|r| parse_floats(r, "edge_lengths")).transpose()?;
    if let Some(l) = &edge_lengths {
        if l.len() != triangulation.edges().len() {
            return Err(MeshError::Parse(format!(
                "{} edge lengths for {} edges",
                l.len(),
                triangulation.edges().len()
            )));
        }
    }
    Ok(MeshFile { triangulation, realization: PlanarRealization::new(positions, geometry), radii, edge_lengths })
}
