use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::hull::{affine_hull, enumerate_facets, extreme_indices, points_to_matrix, AffineHull, Facet};
use super::lp::{maximize, LpOutcome};
use super::mnp::project_onto_hull;
use super::{Point, ProjectionDetail, Tangent};
use crate::error::{Error, Result};

/// Relative duality-gap tolerance for the min-norm-point iteration.
const PROJECTION_GAP_TOL: f64 = 1e-14;
/// Iteration cap of the min-norm-point iteration.
const PROJECTION_MAX_ITER: usize = 100_000;

/// A polytope given by its vertices (all extreme).
#[derive(Clone, Debug)]
pub struct Polytope {
    /// `dim × n`, one vertex per column.
    vertices: DMatrix<f64>,
    affine: AffineHull,
    scale: f64,
    facets: OnceLock<Result<Vec<Facet>>>,
}

impl Polytope {
    /// Convex hull of a finite point set, keeping only extreme points.
    pub fn hull(points: &[Point]) -> Result<Self> {
        let m = points_to_matrix(points)?;
        Ok(Self::hull_of_columns(&m))
    }

    pub(crate) fn hull_of_columns(m: &DMatrix<f64>) -> Self {
        let keep = extreme_indices(m);
        Self::from_extreme_columns(m.select_columns(&keep))
    }

    /// Wraps columns already known to be extreme points.
    pub(crate) fn from_extreme_columns(vertices: DMatrix<f64>) -> Self {
        let affine = affine_hull(&vertices);
        let scale = vertices
            .column_iter()
            .map(|c| (c - &affine.origin).norm())
            .fold(0.0_f64, f64::max);
        Polytope {
            vertices,
            affine,
            scale,
            facets: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.nrows()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.ncols()
    }

    pub fn vertex(&self, i: usize) -> Point {
        Point::from(self.vertices.column(i).into_owned())
    }

    pub fn vertices(&self) -> Vec<Point> {
        (0..self.num_vertices()).map(|i| self.vertex(i)).collect()
    }

    pub fn vertex_matrix(&self) -> &DMatrix<f64> {
        &self.vertices
    }

    pub fn affine_hull(&self) -> &AffineHull {
        &self.affine
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        self.affine.dim()
    }

    /// Largest distance from a vertex to the vertex centroid.
    pub fn radius(&self) -> f64 {
        self.scale
    }

    /// Facets relative to the affine hull; computed once and cached.
    pub fn facets(&self) -> Result<&[Facet]> {
        self.facets
            .get_or_init(|| enumerate_facets(&self.vertices, &self.affine))
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.project_detail(x, None).point
    }

    pub(crate) fn project_detail(&self, x: &DVector<f64>, warm: Option<&[usize]>) -> ProjectionDetail {
        let r = project_onto_hull(&self.vertices, x, warm, PROJECTION_GAP_TOL, PROJECTION_MAX_ITER);
        let dist = (&r.point - x).norm();
        let tangent = if dist <= 1e-12 * self.scale.max(1.0) {
            Tangent::Basis(self.affine.basis.clone())
        } else {
            Tangent::Basis(self.face_basis(&r.support))
        };
        ProjectionDetail {
            point: r.point,
            tangent,
            support: r.support,
        }
    }

    /// Orthonormal basis of the direction space of `conv{v_i : i ∈ idx}`.
    fn face_basis(&self, idx: &[usize]) -> DMatrix<f64> {
        let d = self.dim();
        if idx.len() <= 1 {
            return DMatrix::zeros(d, 0);
        }
        let base = self.vertices.column(idx[0]);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for &i in &idx[1..] {
            let mut v = self.vertices.column(i) - base;
            let n0 = v.norm();
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
            let n = v.norm();
            if n > 1e-10 * n0.max(f64::MIN_POSITIVE) {
                cols.push(v / n);
            }
        }
        if cols.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// `(max ⟨d, v⟩, argmax vertex)`.
    pub fn support(&self, direction: &DVector<f64>) -> (f64, DVector<f64>) {
        let values = self.vertices.tr_mul(direction);
        let (i, v) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("polytope has vertices");
        (*v, self.vertices.column(i).into_owned())
    }

    /// Optimal value of "maximize min λᵢ subject to x = Σ λᵢ vᵢ, Σ λᵢ = 1",
    /// or `None` when `x` is not a convex combination of the vertices.
    pub fn interior_margin(&self, x: &DVector<f64>) -> Option<f64> {
        let d = self.dim();
        let n = self.num_vertices();
        // λ = t·1 + s with t, s ≥ 0; maximize t.
        let row_sums = self.vertices.column_sum();
        let mut a = DMatrix::zeros(d + 1, n + 1);
        for i in 0..d {
            a[(i, 0)] = row_sums[i];
            for j in 0..n {
                a[(i, j + 1)] = self.vertices[(i, j)];
            }
        }
        a[(d, 0)] = n as f64;
        for j in 0..n {
            a[(d, j + 1)] = 1.0;
        }
        let mut b: Vec<f64> = x.iter().copied().collect();
        b.push(1.0);
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        match maximize(&c, &a, &b, 1e-9) {
            LpOutcome::Optimal { value, .. } => Some(value),
            LpOutcome::Infeasible { .. } => None,
            LpOutcome::Unbounded => unreachable!("t ≤ 1/n"),
        }
    }

    pub fn translate(&self, v: &DVector<f64>) -> Polytope {
        let mut m = self.vertices.clone();
        for mut c in m.column_iter_mut() {
            c += v;
        }
        Polytope::from_extreme_columns(m)
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

/// Convex hull of `points`, returned with its extreme points only.
pub fn convex_hull(points: &[Point]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::EmptyInput("convex_hull needs at least one point"));
    }
    Polytope::hull(points)
}
