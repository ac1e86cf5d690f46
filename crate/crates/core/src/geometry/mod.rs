//! Compact convex bodies: V-polytopes and ellipsoids.

mod ellipsoid;
pub mod hull;
pub mod lp;
pub(crate) mod mnp;
mod point;
mod polytope;
mod product;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use ellipsoid::Ellipsoid;
pub use hull::{AffineHull, Facet, FACET_DIM_CAP};
pub use point::{format_coord, Point};
pub use polytope::{convex_hull, Polytope};
pub use product::ProductBody;

use crate::error::{Error, Result};

/// Local first-order behaviour of a metric projection at a point.
#[derive(Clone, Debug)]
pub(crate) enum Tangent {
    Identity,
    /// Orthogonal projector onto the span of these orthonormal columns.
    Basis(DMatrix<f64>),
    /// Explicit symmetric Jacobian.
    Linear(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub(crate) struct ProjectionDetail {
    pub point: DVector<f64>,
    pub tangent: Tangent,
    /// Active vertex indices (polytopes only).
    pub support: Vec<usize>,
}

/// A compact convex set.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

impl From<Polytope> for ConvexBody {
    fn from(p: Polytope) -> Self {
        ConvexBody::Polytope(p)
    }
}

impl From<Ellipsoid> for ConvexBody {
    fn from(e: Ellipsoid) -> Self {
        ConvexBody::Ellipsoid(e)
    }
}

impl ConvexBody {
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Polytope(p) => p.dim(),
            ConvexBody::Ellipsoid(e) => e.dim(),
        }
    }

    /// Radius of a ball around the body's reference center containing it.
    pub fn radius(&self) -> f64 {
        match self {
            ConvexBody::Polytope(p) => p.radius(),
            ConvexBody::Ellipsoid(e) => e.radius(),
        }
    }

    /// A point of the body used as a reference center.
    pub fn center(&self) -> DVector<f64> {
        match self {
            ConvexBody::Polytope(p) => p.vertex_matrix().column_mean(),
            ConvexBody::Ellipsoid(e) => e.center().clone(),
        }
    }

    pub(crate) fn project_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            ConvexBody::Polytope(p) => p.project(x),
            ConvexBody::Ellipsoid(e) => e.project(x),
        }
    }

    pub(crate) fn project_detail(&self, x: &DVector<f64>, warm: Option<&[usize]>) -> ProjectionDetail {
        match self {
            ConvexBody::Polytope(p) => p.project_detail(x, warm),
            ConvexBody::Ellipsoid(e) => e.project_detail(x),
        }
    }

    pub(crate) fn support_vec(&self, d: &DVector<f64>) -> (f64, DVector<f64>) {
        match self {
            ConvexBody::Polytope(p) => p.support(d),
            ConvexBody::Ellipsoid(e) => e.support(d),
        }
    }

    /// Euclidean distance from `x` to the body.
    pub fn distance(&self, x: &Point) -> Result<f64> {
        Error::check_dim(self.dim(), x.dim())?;
        Ok((self.project_vec(x) - x.as_vector()).norm())
    }

    pub fn translate(&self, v: &Point) -> Result<ConvexBody> {
        Error::check_dim(self.dim(), v.dim())?;
        Ok(match self {
            ConvexBody::Polytope(p) => ConvexBody::Polytope(p.translate(v)),
            ConvexBody::Ellipsoid(e) => ConvexBody::Ellipsoid(e.translate(v)),
        })
    }
}

/// `dist(x, body) ≤ tol`.
pub fn membership(body: &ConvexBody, x: &Point, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("negative tolerance {tol}")));
    }
    Ok(body.distance(x)? <= tol)
}

/// Euclidean nearest point of the body.
pub fn project_point(body: &ConvexBody, x: &Point) -> Result<Point> {
    Error::check_dim(body.dim(), x.dim())?;
    Ok(Point::from(body.project_vec(x)))
}

/// Support function value and a maximizer.
pub fn support(body: &ConvexBody, direction: &Point) -> Result<(f64, Point)> {
    Error::check_dim(body.dim(), direction.dim())?;
    if direction.norm() == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let (v, arg) = body.support_vec(direction);
    Ok((v, Point::from(arg)))
}

/// Midpoints of nontrivial chords are relative interior points. For
/// polytopes this holds exactly when the affine hull has dimension ≤ 1,
/// reading the boundary relative to the affine hull.
pub fn is_strictly_convex(body: &ConvexBody) -> bool {
    match body {
        ConvexBody::Ellipsoid(_) => true,
        ConvexBody::Polytope(p) => p.affine_dim() <= 1,
    }
}

/// Relative-interior membership (interior within the affine hull).
pub fn is_relative_interior_point(body: &ConvexBody, x: &Point) -> Result<bool> {
    Error::check_dim(body.dim(), x.dim())?;
    Ok(match body {
        ConvexBody::Polytope(p) => p.interior_margin(x).is_some_and(|m| m > 1e-9),
        ConvexBody::Ellipsoid(e) => e.gauge_sq(x) < 1.0 - 1e-9,
    })
}

/// Result of [`minkowski_sum`].
#[derive(Clone, Debug)]
pub struct MinkowskiSum {
    pub body: ConvexBody,
    /// Estimated Hausdorff distance between `body` and the exact sum;
    /// zero when the sum is an exact polytope. The exact sum lies between
    /// `body` and `body` enlarged by this gap.
    pub hausdorff_gap: f64,
}

/// Options for sums involving an ellipsoid.
#[derive(Clone, Copy, Debug)]
pub struct SumOptions {
    /// Number of support directions; `None` means `2·10^dim`, capped at
    /// [`MAX_DEFAULT_DIRECTIONS`].
    pub directions: Option<usize>,
    pub seed: u64,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions {
            directions: None,
            seed: 0,
        }
    }
}

pub const MAX_DEFAULT_DIRECTIONS: usize = 200_000;

/// Minkowski sum `A + B`.
pub fn minkowski_sum(a: &ConvexBody, b: &ConvexBody) -> Result<MinkowskiSum> {
    minkowski_sum_with(a, b, SumOptions::default())
}

pub fn minkowski_sum_with(a: &ConvexBody, b: &ConvexBody, opts: SumOptions) -> Result<MinkowskiSum> {
    Error::check_dim(a.dim(), b.dim())?;
    let d = a.dim();
    if let (ConvexBody::Polytope(p), ConvexBody::Polytope(q)) = (a, b) {
        let (va, vb) = (p.vertex_matrix(), q.vertex_matrix());
        let mut sums = DMatrix::zeros(d, va.ncols() * vb.ncols());
        let mut k = 0;
        for ca in va.column_iter() {
            for cb in vb.column_iter() {
                sums.set_column(k, &(ca + cb));
                k += 1;
            }
        }
        return Ok(MinkowskiSum {
            body: ConvexBody::Polytope(Polytope::hull_of_columns(&sums)),
            hausdorff_gap: 0.0,
        });
    }

    let count = opts.directions.unwrap_or_else(|| {
        10usize
            .checked_pow(d as u32)
            .map(|p| 2 * p)
            .unwrap_or(usize::MAX)
            .min(MAX_DEFAULT_DIRECTIONS)
    });
    let dirs = sample_directions(d, count.max(2), opts.seed);
    // In generic directions both summands have unique maximizers, so the
    // support points of the sum are exposed points: vertices of the inner
    // polytope without a hull pass.
    let mut pts: Vec<DVector<f64>> = Vec::with_capacity(dirs.len());
    for dir in &dirs {
        let p = a.support_vec(dir).1 + b.support_vec(dir).1;
        if pts.last().is_none_or(|q: &DVector<f64>| (q - &p).norm() > 1e-13) {
            pts.push(p);
        }
    }
    let inner = Polytope::from_extreme_columns(DMatrix::from_columns(&pts));
    let probes = sample_directions(d, (2 * count + 1).min(4001), opts.seed.wrapping_add(1));
    let gap = probes
        .iter()
        .map(|dir| a.support_vec(dir).0 + b.support_vec(dir).0 - inner.support(dir).0)
        .fold(0.0_f64, f64::max);
    Ok(MinkowskiSum {
        body: ConvexBody::Polytope(inner),
        hausdorff_gap: gap,
    })
}

/// Unit directions: exact `±1` in one dimension, equally spaced angles in
/// the plane (seed-dependent phase), seeded Gaussian samples otherwise.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    match dim {
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => (0..count)
            .map(|k| {
                let phase = (seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64 / (1u64 << 53) as f64;
                let t = 2.0 * std::f64::consts::PI * (k as f64 + phase) / count as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| loop {
                    let v = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                    let n: f64 = v.norm();
                    if n > 1e-12 {
                        break v / n;
                    }
                })
                .collect()
        }
    }
}
