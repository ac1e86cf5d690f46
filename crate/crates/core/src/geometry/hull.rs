//! Convex hulls of finite point sets: extreme-point reduction in any
//! dimension and facet enumeration for affine dimension at most
//! [`FACET_DIM_CAP`].

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::mnp::project_onto_hull;
use super::Point;
use crate::error::{Error, Result};

/// Largest affine dimension for which facets are enumerated.
pub const FACET_DIM_CAP: usize = 6;

/// Affine hull `origin + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct AffineHull {
    pub origin: DVector<f64>,
    /// `d × r`, orthonormal columns.
    pub basis: DMatrix<f64>,
}

impl AffineHull {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Coordinates of `x - origin` in the basis.
    pub fn local(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(&(x - &self.origin))
    }

    /// Distance from `x` to the affine hull.
    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.origin;
        (&d - &self.basis * self.basis.tr_mul(&d)).norm()
    }
}

/// Affine hull of the columns of `pts`, ranks decided at `1e-10` relative
/// to the largest singular value.
pub fn affine_hull(pts: &DMatrix<f64>) -> AffineHull {
    let d = pts.nrows();
    let n = pts.ncols();
    let origin = pts.column_mean();
    let mut centered = pts.clone();
    for mut c in centered.column_iter_mut() {
        c -= &origin;
    }
    let svd = centered.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let scale = pts.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    let thresh = (1e-10 * top).max(1e-14 * scale * (n as f64).sqrt());
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thresh)
        .collect();
    let mut basis = DMatrix::zeros(d, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    AffineHull { origin, basis }
}

pub(crate) fn points_to_matrix(points: &[Point]) -> Result<DMatrix<f64>> {
    let first = points.first().ok_or(Error::EmptyInput("point set"))?;
    let d = first.dim();
    for p in points {
        Error::check_dim(d, p.dim())?;
    }
    Ok(DMatrix::from_fn(d, points.len(), |i, j| points[j][i]))
}

/// Indices of the extreme points among the columns of `pts`.
///
/// Points are eliminated one at a time: a point is dropped when its
/// distance to the hull of the surviving others is at most
/// `1e-10 · scale`. Duplicates therefore keep exactly one copy.
pub fn extreme_indices(pts: &DMatrix<f64>) -> Vec<usize> {
    let n = pts.ncols();
    if n <= 1 {
        return (0..n).collect();
    }
    let centroid = pts.column_mean();
    let scale = pts
        .column_iter()
        .map(|c| (c - &centroid).norm())
        .fold(0.0_f64, f64::max);
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut alive: Vec<usize> = (0..n).collect();
    let mut k = 0;
    while k < alive.len() {
        if alive.len() == 1 {
            break;
        }
        let idx = alive[k];
        let others: Vec<usize> = alive.iter().copied().filter(|&j| j != idx).collect();
        let sub = pts.select_columns(&others);
        let x = pts.column(idx).into_owned();
        let r = project_onto_hull(&sub, &x, None, 1e-15, 100_000);
        if (r.point - &x).norm() <= tol {
            alive.remove(k);
        } else {
            k += 1;
        }
    }
    alive
}

/// A facet of a polytope, relative to its affine hull.
#[derive(Clone, Debug)]
pub struct Facet {
    /// Unit outer normal, lying in the direction space of the affine hull.
    pub normal: Point,
    /// `⟨normal, x⟩ ≤ offset` on the polytope, with equality on the facet.
    pub offset: f64,
    /// Vertex indices lying on the facet.
    pub vertices: Vec<usize>,
    /// Orthonormal basis (`d × (r-1)`) of the facet's direction space.
    pub directions: DMatrix<f64>,
}

struct Simplex {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
}

/// Normal of the hyperplane through `pts` (r points in `R^r`) via signed
/// cofactors of the difference matrix.
fn hyperplane_normal(pts: &[&DVector<f64>]) -> DVector<f64> {
    let r = pts[0].len();
    if r == 1 {
        return DVector::from_element(1, 1.0);
    }
    let diffs = DMatrix::from_fn(r - 1, r, |i, j| pts[i + 1][j] - pts[0][j]);
    DVector::from_fn(r, |j, _| {
        let minor = diffs.clone().remove_column(j);
        let det = minor.determinant();
        if j % 2 == 0 {
            det
        } else {
            -det
        }
    })
}

fn make_simplex(
    verts: Vec<usize>,
    local: &[DVector<f64>],
    interior: &DVector<f64>,
) -> Option<Simplex> {
    let pts: Vec<&DVector<f64>> = verts.iter().map(|&v| &local[v]).collect();
    let mut normal = hyperplane_normal(&pts);
    let norm = normal.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    normal /= norm;
    let mut offset = normal.dot(pts[0]);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    Some(Simplex {
        verts,
        normal,
        offset,
    })
}

/// Facet hyperplanes of the hull of `local` points in `R^r` (full
/// dimensional), as a simplicial boundary complex.
fn simplicial_boundary(local: &[DVector<f64>], eps: f64) -> Vec<Simplex> {
    let r = local[0].len();
    let n = local.len();

    // Initial simplex: greedily maximize distance to the current affine span.
    let mut init = vec![0usize];
    let far = (0..n)
        .max_by(|&a, &b| {
            (&local[a] - &local[0])
                .norm()
                .total_cmp(&(&local[b] - &local[0]).norm())
        })
        .unwrap();
    init.push(far);
    while init.len() < r + 1 {
        let base = &local[init[0]];
        let span = DMatrix::from_fn(r, init.len() - 1, |i, j| local[init[j + 1]][i] - base[i]);
        let q = span.qr().q();
        let next = (0..n)
            .filter(|i| !init.contains(i))
            .max_by(|&a, &b| {
                let da = &local[a] - base;
                let db = &local[b] - base;
                let ra = (&da - &q * q.tr_mul(&da)).norm();
                let rb = (&db - &q * q.tr_mul(&db)).norm();
                ra.total_cmp(&rb)
            })
            .unwrap();
        init.push(next);
    }
    let interior = init
        .iter()
        .fold(DVector::zeros(r), |acc, &i| acc + &local[i])
        / (r as f64 + 1.0);

    let mut facets: Vec<Simplex> = (0..=r)
        .filter_map(|skip| {
            let verts: Vec<usize> = init
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != skip)
                .map(|(_, &v)| v)
                .collect();
            make_simplex(verts, local, &interior)
        })
        .collect();

    for p in 0..n {
        if init.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(&local[p]) - f.offset > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            let vs = &facets[fi].verts;
            for skip in 0..vs.len() {
                let mut ridge: Vec<usize> = vs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut keep = vec![true; facets.len()];
        for &fi in &visible {
            keep[fi] = false;
        }
        let mut next: Vec<Simplex> = facets
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(f, _)| f)
            .collect();
        let mut horizon: Vec<Vec<usize>> = ridges
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        for mut ridge in horizon {
            ridge.push(p);
            if let Some(s) = make_simplex(ridge, local, &interior) {
                next.push(s);
            }
        }
        facets = next;
    }
    facets
}

/// Facets of the hull of the columns of `pts` (assumed extreme), relative to
/// the affine hull.
pub fn enumerate_facets(pts: &DMatrix<f64>, aff: &AffineHull) -> Result<Vec<Facet>> {
    let r = aff.dim();
    if r > FACET_DIM_CAP {
        return Err(Error::DimensionCapExceeded {
            dim: r,
            cap: FACET_DIM_CAP,
        });
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let local: Vec<DVector<f64>> = pts.column_iter().map(|c| aff.local(&c.into_owned())).collect();
    let scale = local.iter().map(|v| v.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-10 * scale;
    let simplices = simplicial_boundary(&local, eps);

    // Merge coplanar simplices into facets.
    let mut planes: Vec<(DVector<f64>, f64)> = Vec::new();
    for s in &simplices {
        let dup = planes
            .iter()
            .any(|(n, o)| (n - &s.normal).norm() < 1e-8 && (o - s.offset).abs() < 1e-8 * scale);
        if !dup {
            planes.push((s.normal.clone(), s.offset));
        }
    }
    let facets = planes
        .into_iter()
        .map(|(n_loc, off_loc)| {
            let vertices: Vec<usize> = local
                .iter()
                .enumerate()
                .filter(|(_, v)| (n_loc.dot(v) - off_loc).abs() <= 1e2 * eps)
                .map(|(i, _)| i)
                .collect();
            let normal = &aff.basis * &n_loc;
            let offset = off_loc + normal.dot(&aff.origin);
            // complement of n_loc in R^r, mapped to ambient coordinates
            let q = complete_basis(&n_loc);
            let directions = &aff.basis * q;
            Facet {
                normal: Point::from(normal),
                offset,
                vertices,
                directions,
            }
        })
        .collect();
    Ok(facets)
}

/// Orthonormal basis (`r × (r-1)`) of the orthogonal complement of a unit
/// vector `n` in `R^r`.
fn complete_basis(n: &DVector<f64>) -> DMatrix<f64> {
    let r = n.len();
    if r == 1 {
        return DMatrix::zeros(1, 0);
    }
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(r - 1);
    let mut order: Vec<usize> = (0..r).collect();
    // start from the axes least aligned with n
    order.sort_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()));
    for &i in &order {
        if cols.len() == r - 1 {
            break;
        }
        let mut v = DVector::zeros(r);
        v[i] = 1.0;
        v -= n * n[i];
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}
