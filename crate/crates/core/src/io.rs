//! JSON documents for bodies and maps, and CSV reports.
//!
//! ```text
//! {"type":"polytope","vertices":[[x, ...], ...]}
//! {"type":"ellipsoid","center":[...],"shape":[[...], ...]}
//! {"type":"linear_map","matrix":[[...], ...]}
//! {"type":"product_map","left":[[...]],"right":[[...]]}
//! ```
//!
//! Floats are written in shortest round-trip form.

use std::collections::HashMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::{PathExperiment, ProbeReport};
use crate::geometry::{ConvexBody, Ellipsoid, Point, Polytope};
use crate::linmaps::{LinearMap, ProductMap};
use crate::splitting::{ContinuityReport, SampledMap, SplitResult};

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum Raw {
    Polytope { vertices: Vec<Vec<f64>> },
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
    LinearMap { matrix: Vec<Vec<f64>> },
    ProductMap { left: Vec<Vec<f64>>, right: Vec<Vec<f64>> },
}

/// Any parsed JSON document.
#[derive(Clone, Debug)]
pub enum Document {
    Body(ConvexBody),
    LinearMap(LinearMap),
    ProductMap(ProductMap),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Body(ConvexBody::Polytope(_)) => "polytope",
            Document::Body(ConvexBody::Ellipsoid(_)) => "ellipsoid",
            Document::LinearMap(_) => "linear_map",
            Document::ProductMap(_) => "product_map",
        }
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let Some(first) = rows.first() else {
        return Err(Error::InvalidInput(format!("{what} has no rows")));
    };
    let n = first.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{what} rows must be nonempty and of equal length")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has a non-finite entry")));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Parses any of the four document kinds, validating invariants.
pub fn parse_document(text: &str) -> Result<Document> {
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad JSON: {e}")))?;
    Ok(match raw {
        Raw::Polytope { vertices } => {
            let pts = vertices.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
            Document::Body(Polytope::hull(&pts)?.into())
        }
        Raw::Ellipsoid { center, shape } => {
            Document::Body(Ellipsoid::new(Point::new(center)?, matrix(&shape, "shape")?)?.into())
        }
        Raw::LinearMap { matrix: m } => Document::LinearMap(LinearMap::new(matrix(&m, "matrix")?)?),
        Raw::ProductMap { left, right } => {
            Document::ProductMap(ProductMap::new(matrix(&left, "left")?, matrix(&right, "right")?)?)
        }
    })
}

pub fn parse_body(text: &str) -> Result<ConvexBody> {
    match parse_document(text)? {
        Document::Body(b) => Ok(b),
        other => Err(Error::InvalidInput(format!("expected a body, got {}", other.kind()))),
    }
}

/// A linear map; a product map is read as its joint `[left | right]`.
pub fn parse_linear_map(text: &str) -> Result<LinearMap> {
    match parse_document(text)? {
        Document::LinearMap(l) => Ok(l),
        Document::ProductMap(p) => Ok(p.to_linear_map()),
        other => Err(Error::InvalidInput(format!("expected a map, got {}", other.kind()))),
    }
}

pub fn parse_product_map(text: &str) -> Result<ProductMap> {
    match parse_document(text)? {
        Document::ProductMap(p) => Ok(p),
        other => Err(Error::InvalidInput(format!("expected a product map, got {}", other.kind()))),
    }
}

fn emit(raw: &Raw) -> String {
    serde_json::to_string(raw).expect("plain data serializes")
}

pub fn body_to_json(body: &ConvexBody) -> String {
    match body {
        ConvexBody::Polytope(p) => emit(&Raw::Polytope {
            vertices: p.vertices().into_iter().map(Vec::from).collect(),
        }),
        ConvexBody::Ellipsoid(e) => emit(&Raw::Ellipsoid {
            center: e.center().iter().copied().collect(),
            shape: rows_of(e.shape()),
        }),
    }
}

pub fn linear_map_to_json(l: &LinearMap) -> String {
    emit(&Raw::LinearMap { matrix: rows_of(l.matrix()) })
}

pub fn product_map_to_json(l: &ProductMap) -> String {
    emit(&Raw::ProductMap {
        left: rows_of(l.left()),
        right: rows_of(l.right()),
    })
}

/// `"x,y,..."` with optional surrounding parentheses and spaces.
pub fn parse_point(text: &str) -> Result<Point> {
    let t = text.trim().trim_start_matches('(').trim_end_matches(')');
    let coords = t
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a number: {:?}", s.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Point::new(coords)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV: {e}"))
}

fn numbers(rec: &csv::StringRecord) -> Option<Vec<f64>> {
    rec.iter().map(|f| f.trim().parse::<f64>().ok()).collect()
}

/// One point per row; a non-numeric first row is taken as a header.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        match numbers(&rec) {
            Some(v) => out.push(Point::new(v)?),
            None if k == 0 => continue,
            None => return Err(Error::InvalidInput(format!("row {}: non-numeric field", k + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no points in CSV"));
    }
    Ok(out)
}

/// Sampled map from a CSV with header `id,adj,v0,v1,...`. `adj` lists
/// neighbour ids separated by `;`; adjacency is symmetrized.
pub fn read_sampled_map_csv<R: Read>(reader: R) -> Result<SampledMap> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "adj" {
        return Err(Error::InvalidInput("sampled map header must start with id,adj".into()));
    }
    let mut ids = Vec::new();
    let mut adj = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        ids.push(rec[0].to_string());
        adj.push(rec[1].to_string());
        let coords = rec
            .iter()
            .skip(2)
            .map(|f| f.parse::<f64>().map_err(|_| Error::InvalidInput(format!("sample {}: not a number: {f:?}", &rec[0]))))
            .collect::<Result<Vec<_>>>()?;
        values.push(Point::new(coords)?);
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
    let mut edges = Vec::new();
    for (i, list) in adj.iter().enumerate() {
        for nb in list.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let &j = index
                .get(nb)
                .ok_or_else(|| Error::InvalidInput(format!("sample {}: unknown neighbour {nb:?}", ids[i])))?;
            if i != j {
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    SampledMap::new(ids, values, edges)
}

fn finish<W: Write>(wtr: csv::Writer<W>) -> Result<()> {
    wtr.into_inner()
        .map_err(|e| Error::InvalidInput(format!("write failed: {}", e.error())))?
        .flush()
        .map_err(|e| Error::InvalidInput(format!("write failed: {e}")))
}

fn columns(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}{i}"))
}

/// `y0,…,offset,dist`; `dist` is empty for an infeasible target.
pub fn write_probe_csv<W: Write>(w: W, report: &ProbeReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let m = report.image.dim();
    let header: Vec<String> = columns("y", m).chain(["offset".into(), "dist".into()]).collect();
    wtr.write_record(&header).map_err(csv_err)?;
    for t in &report.targets {
        let mut row: Vec<String> = t.y.iter().map(f64::to_string).collect();
        row.push(t.offset.to_string());
        row.push(t.dist.map(|d| d.to_string()).unwrap_or_default());
        wtr.write_record(&row).map_err(csv_err)?;
    }
    finish(wtr)
}

/// `edge,from,to,jump,fiber_jump`; `fiber_jump` is empty when the report
/// has no kernel component.
pub fn write_continuity_csv<W: Write>(w: W, report: &ContinuityReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["edge", "from", "to", "jump", "fiber_jump"]).map_err(csv_err)?;
    for (k, (&(i, j), jump)) in report.edges.iter().zip(&report.jumps).enumerate() {
        let fj = report.fiber_jumps.get(k).map(f64::to_string).unwrap_or_default();
        wtr.write_record([k.to_string(), i.to_string(), j.to_string(), jump.to_string(), fj])
            .map_err(csv_err)?;
    }
    finish(wtr)
}

/// `id,a0,…,b0,…,residual,body_violation`.
pub fn write_splits_csv<W: Write>(w: W, ids: &[String], splits: &[SplitResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let (na, nb) = splits.first().map_or((0, 0), |s| (s.a.dim(), s.b.dim()));
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain(columns("a", na))
        .chain(columns("b", nb))
        .chain(["residual".into(), "body_violation".into()])
        .collect();
    wtr.write_record(&header).map_err(csv_err)?;
    for (id, s) in ids.iter().zip(splits) {
        let row: Vec<String> = std::iter::once(id.clone())
            .chain(s.a.iter().chain(s.b.iter()).map(f64::to_string))
            .chain([s.residual.to_string(), s.body_violation.to_string()])
            .collect();
        wtr.write_record(&row).map_err(csv_err)?;
    }
    finish(wtr)
}

/// `index,angle,y0,y1,x,y,z,jump` for a path experiment in `R³`; `jump`
/// is the distance to the previous selection, and to the last one on the
/// first row.
pub fn write_path_csv<W: Write>(w: W, exp: &PathExperiment) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["index", "angle", "y0", "y1", "x", "y", "z", "jump"]).map_err(csv_err)?;
    let n = exp.selections.len();
    for k in 0..n {
        let s = &exp.selections[k];
        let prev = &exp.selections[(k + n - 1) % n];
        let mut row = vec![k.to_string(), exp.angles[k].to_string()];
        row.extend(exp.targets[k].iter().chain(s.iter()).map(f64::to_string));
        row.push(s.distance(prev).to_string());
        wtr.write_record(&row).map_err(csv_err)?;
    }
    finish(wtr)
}
