//! Fibers of polyhedral bodies by the method of multipliers.
//!
//! With `C = conv{v_j}` each subproblem
//!
//! ```text
//! minimize ½‖z − a‖² + μᵀ(Az − y) + ½ρ‖Az − y‖²  over z ∈ C
//! ```
//!
//! equals `min ½‖Fz − b‖²` over `C` with `F = [I; √ρ A]` and
//! `b = [a; √ρ y − μ/√ρ]`, the min-norm-point problem for the lifted
//! vertices `F v_j`. The multipliers follow `μ ← μ + ρ(Az − y)`, and `ρ`
//! grows tenfold whenever the residual fails to drop by a factor 4. Targets on
//! the boundary of `L(C)`, where the dual optimum sits far out, cost no
//! more than interior ones.

use nalgebra::{DMatrix, DVector};

use super::{inf_norm, solution, FiberPoint, FiberSpec};
use crate::error::{Error, Result};
use crate::geometry::mnp::project_onto_hull;
use crate::geometry::{ConvexBody, Point};

/// Largest vertex count of a product of polytopes solved here.
pub const PRODUCT_VERTEX_CAP: usize = 20_000;
const RHO: f64 = 1e6;
const RHO_MAX: f64 = 1e12;
const MAX_OUTER: usize = 300;
const STALL: usize = 30;
const GAP_TOL: f64 = 1e-15;
const MNP_MAX_ITER: usize = 100_000;

pub(super) struct Lifted {
    verts: DMatrix<f64>,
    image: DMatrix<f64>,
    lifted: DMatrix<f64>,
    rho: f64,
}

/// Vertex data of the body when every block is a polytope and the product
/// has at most [`PRODUCT_VERTEX_CAP`] vertices.
pub(super) fn lift(spec: &FiberSpec) -> Option<Lifted> {
    let blocks: Vec<&DMatrix<f64>> = spec
        .body
        .blocks()
        .iter()
        .map(|b| match b {
            ConvexBody::Polytope(p) => Some(p.vertex_matrix()),
            ConvexBody::Ellipsoid(_) => None,
        })
        .collect::<Option<_>>()?;
    let count = blocks
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.ncols()))
        .filter(|&c| c <= PRODUCT_VERTEX_CAP)?;

    let d = spec.domain_dim();
    let mut verts = DMatrix::zeros(d, count);
    for j in 0..count {
        let mut rest = j;
        let mut off = 0;
        for v in &blocks {
            let k = rest % v.ncols();
            rest /= v.ncols();
            verts.view_mut((off, j), (v.nrows(), 1)).copy_from(&v.column(k));
            off += v.nrows();
        }
    }
    let a = spec.map.matrix();
    let m = a.nrows();
    let scale = (a * a.transpose()).trace() / m as f64;
    let rho = RHO / scale;
    let image = a * &verts;
    let mut lifted = DMatrix::zeros(d + m, count);
    lifted.rows_mut(0, d).copy_from(&verts);
    lifted.rows_mut(d, m).copy_from(&(&image * rho.sqrt()));
    Some(Lifted {
        verts,
        image,
        lifted,
        rho,
    })
}

pub(super) fn solve(spec: &FiberSpec, l: &Lifted, anchor: &Point, tol: f64) -> Result<FiberPoint> {
    let y = spec.target.as_vector();
    let reach = project_onto_hull(&l.image, y, None, GAP_TOL, MNP_MAX_ITER);
    let gap = (&reach.point - y).norm();
    if gap > tol {
        return Ok(FiberPoint::Empty { distance: gap });
    }

    let (d, m) = (l.verts.nrows(), l.image.nrows());
    let mut rho = l.rho;
    let rho_max = l.rho * RHO_MAX / RHO;
    let mut lifted = l.lifted.clone();
    let combine = |mat: &DMatrix<f64>, support: &[usize], w: &[f64]| -> DVector<f64> {
        support
            .iter()
            .zip(w)
            .fold(DVector::zeros(mat.nrows()), |acc, (&j, &wj)| acc + mat.column(j) * wj)
    };
    let mut b = DVector::zeros(d + m);
    b.rows_mut(0, d).copy_from(anchor.as_vector());
    let mut mu = DVector::<f64>::zeros(m);
    let mut warm: Option<Vec<usize>> = None;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut z = DVector::zeros(d);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < MAX_OUTER {
        iterations += 1;
        let sr = rho.sqrt();
        b.rows_mut(d, m).copy_from(&(y * sr - &mu / sr));
        let p = project_onto_hull(&lifted, &b, warm.as_deref(), GAP_TOL, MNP_MAX_ITER);
        z = combine(&l.verts, &p.support, &p.weights);
        let r = combine(&l.image, &p.support, &p.weights) - y;
        let prev = residual;
        residual = inf_norm(&r);
        warm = Some(p.support);
        if residual <= 1e-3 * tol {
            break;
        }
        mu += &r * rho;
        if residual > 0.25 * prev && rho < rho_max {
            rho *= 10.0;
            lifted.rows_mut(d, m).copy_from(&(&l.image * rho.sqrt()));
        }
        if residual < 0.5 * best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL {
                break;
            }
        }
    }
    if residual <= tol {
        return Ok(FiberPoint::Found(solution(spec, anchor, z, iterations)));
    }
    Err(Error::NonConvergence { iterations, residual })
}
