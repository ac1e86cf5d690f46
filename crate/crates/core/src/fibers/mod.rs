//! The fiber problem `C ∩ L⁻¹(y)` and the min-norm-to-anchor selection.
//!
//! The selected point solves
//!
//! ```text
//! minimize ½‖z − a‖²  subject to  z ∈ C,  A z = y.
//! ```
//!
//! Bodies whose blocks are all polytopes go to an exact augmented
//! Lagrangian method over the vertices (see `polyhedral`). Otherwise the
//! solver maximizes the concave dual
//! `φ(μ) = ½‖z(μ) − a‖² + μᵀ(A z(μ) − y)` with `z(μ) = P_C(a − Aᵀμ)`. Its
//! gradient is the map residual `A z(μ) − y` and `A J Aᵀ` (with `J` a
//! generalized Jacobian of the projection) serves as a negative Hessian,
//! so a Levenberg–Marquardt regularized Newton iteration applies. For
//! polytopes `P_C` is piecewise affine and the iteration terminates with a
//! residual at rounding level; for ellipsoids it converges quadratically
//! away from the boundary of `L(C)`.
//!
//! When `y ∉ L(C)` the dual is unbounded and `d = y − A z(μ)` turns into a
//! separating direction; `⟨d, y⟩ − h_C(Aᵀd) > tol · ‖d‖` certifies an
//! empty fiber.
//!
//! [`fiber_point_dykstra`] solves the same problem by Dykstra's alternating
//! projections between `C` and the level set `{A z = y}`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, ProductBody, ProjectionDetail, Tangent};
use crate::linmaps::{LinearMap, ProductMap};

mod polyhedral;

pub use polyhedral::PRODUCT_VERTEX_CAP;

/// Newton iteration cap.
pub const NEWTON_MAX_ITER: usize = 500;
/// Dykstra iteration cap.
pub const DYKSTRA_MAX_ITER: usize = 100_000;
/// Dykstra stall threshold on the change of iterates.
pub const DYKSTRA_STALL: f64 = 1e-12;

/// A fiber `body ∩ map⁻¹(target)`.
#[derive(Clone, Debug)]
pub struct FiberSpec {
    pub body: ProductBody,
    pub map: LinearMap,
    pub target: Point,
}

impl FiberSpec {
    pub fn new(body: impl Into<ProductBody>, map: LinearMap, target: Point) -> Result<Self> {
        let body = body.into();
        Error::check_dim(map.cols(), body.dim())?;
        Error::check_dim(map.rows(), target.dim())?;
        Ok(FiberSpec { body, map, target })
    }

    /// `(A × B) ∩ L⁻¹(y)` for a product map.
    pub fn product(
        a: impl Into<crate::geometry::ConvexBody>,
        b: impl Into<crate::geometry::ConvexBody>,
        l: &ProductMap,
        target: Point,
    ) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        let (n1, n2) = l.factor_dims();
        Error::check_dim(n1, a.dim())?;
        Error::check_dim(n2, b.dim())?;
        Self::new(ProductBody::pair(a, b), l.to_linear_map(), target)
    }

    pub fn domain_dim(&self) -> usize {
        self.map.cols()
    }

    /// Same body and map, different target.
    pub fn with_target(&self, target: Point) -> Result<Self> {
        Error::check_dim(self.map.rows(), target.dim())?;
        Ok(FiberSpec {
            body: self.body.clone(),
            map: self.map.clone(),
            target,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionKind {
    /// Nearest point of the fiber to the anchor.
    MinNormToAnchor,
}

/// How one point of a convex fiber is chosen.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRule {
    pub kind: SelectionKind,
    pub anchor: Point,
}

impl SelectionRule {
    pub fn min_norm_to(anchor: Point) -> Self {
        SelectionRule {
            kind: SelectionKind::MinNormToAnchor,
            anchor,
        }
    }

    /// Anchor at the origin of a `dim`-dimensional domain.
    pub fn origin(dim: usize) -> Self {
        Self::min_norm_to(Point::origin(dim))
    }
}

/// A selected fiber point with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSolution {
    pub point: Point,
    /// `‖map(point) − target‖∞`.
    pub residual: f64,
    /// Distance from `point` to the body.
    pub body_violation: f64,
    /// `‖point − anchor‖`.
    pub anchor_distance: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiberPoint {
    Found(FiberSolution),
    /// Certified empty: `distance` is a lower bound on the distance from
    /// the target to the image of the body.
    Empty { distance: f64 },
}

impl FiberPoint {
    pub fn found(self) -> Result<FiberSolution> {
        match self {
            FiberPoint::Found(s) => Ok(s),
            FiberPoint::Empty { distance } => Err(Error::EmptyFiber { distance }),
        }
    }
}

fn check_inputs(spec: &FiberSpec, rule: &SelectionRule, tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Error::check_dim(spec.domain_dim(), rule.anchor.dim())
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// `(⟨d, y⟩ − h_C(Aᵀd)) / ‖d‖`, a lower bound on `dist(y, A C)`.
fn separation(spec: &FiberSpec, d: &DVector<f64>) -> f64 {
    let norm = d.norm();
    if !(norm > 0.0) {
        return f64::NEG_INFINITY;
    }
    let h = spec.body.support_vec(&spec.map.matrix().tr_mul(d)).0;
    (d.dot(spec.target.as_vector()) - h) / norm
}

struct Eval {
    mu: DVector<f64>,
    z: DVector<f64>,
    r: DVector<f64>,
    details: Vec<ProjectionDetail>,
}

struct Dual<'a> {
    spec: &'a FiberSpec,
    anchor: &'a DVector<f64>,
}

impl Dual<'_> {
    fn eval(&self, mu: DVector<f64>, warm: Option<&[Vec<usize>]>) -> Eval {
        let a = self.spec.map.matrix();
        let x = self.anchor - a.tr_mul(&mu);
        let details = self.spec.body.project_blocks(&x, warm);
        let mut z = DVector::zeros(x.len());
        for (d, (o, n)) in details.iter().zip(self.spec.body.block_ranges()) {
            z.rows_mut(o, n).copy_from(&d.point);
        }
        let r = self.spec.map.apply_vec(&z) - self.spec.target.as_vector();
        Eval { mu, z, r, details }
    }

    /// `Σⱼ Aⱼ Jⱼ Aⱼᵀ`.
    fn newton_matrix(&self, e: &Eval) -> DMatrix<f64> {
        let a = self.spec.map.matrix();
        let m = a.nrows();
        let mut h = DMatrix::zeros(m, m);
        for (d, (o, n)) in e.details.iter().zip(self.spec.body.block_ranges()) {
            let aj = a.columns(o, n);
            match &d.tangent {
                Tangent::Identity => h += aj * aj.transpose(),
                Tangent::Basis(b) => {
                    if b.ncols() > 0 {
                        let ab = aj * b;
                        h += &ab * ab.transpose();
                    }
                }
                Tangent::Linear(j) => h += aj * j * aj.transpose(),
            }
        }
        h
    }
}

/// Step length along `step` for the concave dual. The directional
/// derivative `g(t) = r(μ + t·step)ᵀ step` is continuous and nonincreasing,
/// so the full step is taken when it still ascends (or shrinks the
/// residual), and otherwise a root of `g` on `[0, 1]` is bracketed and
/// located by Illinois-modified regula falsi until `|g(t)| ≤ 0.1·g(0)`.
/// Returns the new point and whether the full step was taken.
fn line_search(
    dual: &Dual<'_>,
    cur: &Eval,
    step: &DVector<f64>,
    warm: &[Vec<usize>],
    rnorm: f64,
) -> Option<(Eval, bool)> {
    let g0 = cur.r.dot(step);
    if !(g0 > 0.0) || !g0.is_finite() {
        return None;
    }
    let full = dual.eval(&cur.mu + step, Some(warm));
    let g1 = full.r.dot(step);
    if g1 >= 0.0 || full.r.norm() <= 0.9 * rnorm {
        return Some((full, true));
    }
    let (mut lo, mut glo) = (0.0_f64, g0);
    let (mut hi, mut ghi) = (1.0_f64, g1);
    let mut side = 0i8;
    for _ in 0..60 {
        let t = (lo * ghi - hi * glo) / (ghi - glo);
        let t = if t > lo && t < hi { t } else { 0.5 * (lo + hi) };
        let e = dual.eval(&cur.mu + step * t, Some(warm));
        let g = e.r.dot(step);
        if g.abs() <= 0.1 * g0 {
            return Some((e, false));
        }
        if g > 0.0 {
            lo = t;
            glo = g;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = t;
            ghi = g;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 1e-16 * hi {
            return Some((e, false));
        }
    }
    None
}

/// Point of the fiber nearest to the rule's anchor.
///
/// Guarantees `‖map(z) − y‖∞ ≤ tol` and `dist(z, body) ≤ tol` for a
/// returned point. Non-convergence is an error carrying the final
/// residual.
pub fn fiber_point(spec: &FiberSpec, rule: &SelectionRule, tol: f64) -> Result<FiberPoint> {
    check_inputs(spec, rule, tol)?;
    if let Some(lifted) = polyhedral::lift(spec) {
        return polyhedral::solve(spec, &lifted, &rule.anchor, tol);
    }
    let anchor = rule.anchor.as_vector();
    let dual = Dual { spec, anchor };
    let a = spec.map.matrix();
    let m = a.nrows();
    let scale = (a * a.transpose()).trace() / m as f64;
    let target = 1e-4 * tol;

    let mut cur = dual.eval(DVector::zeros(m), None);
    let mut eps = 1e-6 * scale;
    let eps_min = 1e-14 * scale;
    let mut best = inf_norm(&cur.r);
    let mut since_best = 0;
    let mut iterations = 0;

    while iterations < NEWTON_MAX_ITER {
        let res = inf_norm(&cur.r);
        if res <= target {
            break;
        }
        if res > tol {
            let sep = separation(spec, &(-&cur.r));
            if sep > tol {
                return Ok(FiberPoint::Empty { distance: sep });
            }
        }
        iterations += 1;
        let h = dual.newton_matrix(&cur);
        let warm: Vec<Vec<usize>> = cur.details.iter().map(|d| d.support.clone()).collect();
        let rnorm = cur.r.norm();

        let mut accepted = None;
        for _ in 0..40 {
            let reg = &h + DMatrix::identity(m, m) * eps;
            let Some(chol) = reg.cholesky() else {
                eps *= 10.0;
                continue;
            };
            let step = chol.solve(&cur.r);
            if let Some((trial, full)) = line_search(&dual, &cur, &step, &warm, rnorm) {
                eps = if full { (eps * 0.1).max(eps_min) } else { eps * 2.0 };
                accepted = Some(trial);
                break;
            }
            eps *= 10.0;
        }
        let Some(next) = accepted else {
            break;
        };
        cur = next;
        let res = inf_norm(&cur.r);
        if res < 0.5 * best {
            best = res;
            since_best = 0;
        } else {
            best = best.min(res);
            since_best += 1;
            if since_best >= 100 {
                break;
            }
        }
    }

    let residual = inf_norm(&cur.r);
    if residual <= tol {
        return Ok(FiberPoint::Found(solution(spec, &rule.anchor, cur.z, iterations)));
    }
    let sep = separation(spec, &(-&cur.r));
    if sep > tol {
        return Ok(FiberPoint::Empty { distance: sep });
    }
    Err(Error::NonConvergence { iterations, residual })
}

fn solution(spec: &FiberSpec, anchor: &Point, z: DVector<f64>, iterations: usize) -> FiberSolution {
    let residual = inf_norm(&(spec.map.apply_vec(&z) - spec.target.as_vector()));
    let body_violation = (spec.body.project_vec(&z) - &z).norm();
    let point = Point::from(z);
    let anchor_distance = point.distance(anchor);
    FiberSolution {
        point,
        residual,
        body_violation,
        anchor_distance,
        iterations,
    }
}

/// Dykstra's alternating projections between the body and the level set,
/// started at the anchor. Slower than [`fiber_point`] but assumption-free.
///
/// Once the iterates stall, the residual direction is tested as a
/// separating functional to certify an empty fiber.
pub fn fiber_point_dykstra(spec: &FiberSpec, rule: &SelectionRule, tol: f64) -> Result<FiberPoint> {
    check_inputs(spec, rule, tol)?;
    let y = spec.target.as_vector();
    let mut x = rule.anchor.as_vector().clone();
    let n = x.len();
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut iterations = 0;
    let mut body_pt = spec.body.project_vec(&x);
    let mut level_pt = spec.map.level_projection(&x, y);
    let mut quiet = 0;
    while iterations < DYKSTRA_MAX_ITER {
        iterations += 1;
        let level = spec.map.level_projection(&(&x + &p), y);
        p = &x + &p - &level;
        let next_body = spec.body.project_vec(&(&level + &q));
        q = &level + &q - &next_body;
        let change = (&next_body - &body_pt).norm() + (&level - &level_pt).norm();
        body_pt = next_body;
        level_pt = level;
        x = body_pt.clone();
        quiet = if iterations > 1 && change <= DYKSTRA_STALL * (1.0 + x.norm()) { quiet + 1 } else { 0 };
        if quiet >= 3 {
            let r = spec.map.apply_vec(&body_pt) - y;
            if inf_norm(&r) <= tol {
                return Ok(FiberPoint::Found(solution(spec, &rule.anchor, body_pt, iterations)));
            }
            let sep = separation(spec, &(-r));
            if sep > tol {
                return Ok(FiberPoint::Empty { distance: sep });
            }
        }
    }
    let residual = inf_norm(&(spec.map.apply_vec(&body_pt) - y));
    if residual <= tol {
        return Ok(FiberPoint::Found(solution(spec, &rule.anchor, body_pt, iterations)));
    }
    Err(Error::NonConvergence { iterations, residual })
}

/// `‖z − p‖` where `p` is the fiber point nearest to `z`.
pub fn dist_to_fiber(z: &Point, spec: &FiberSpec, tol: f64) -> Result<f64> {
    let s = fiber_point(spec, &SelectionRule::min_norm_to(z.clone()), tol)?.found()?;
    Ok(s.anchor_distance)
}

/// Lower bound on the diameter of the fiber.
///
/// For each of `n_dirs` seeded random unit directions `d` in the kernel
/// (the only directions along which the fiber extends), the extremes of
/// `⟨d, z⟩` are approximated by selecting with anchors far out along `±d`.
/// The best pair found is then refined along its own direction. The result
/// is the largest distance between two computed fiber points, hence never
/// exceeds the true diameter. Directions whose far-anchor selection does
/// not converge (degenerate fibers, where the dual has no maximizer) are
/// skipped.
pub fn fiber_diameter(spec: &FiberSpec, n_dirs: usize, seed: u64, tol: f64) -> Result<f64> {
    if n_dirs < 2 {
        return Err(Error::InvalidInput(format!("n_dirs must be >= 2, got {n_dirs}")));
    }
    let n = spec.domain_dim();
    let center = spec.body.center();
    let first = fiber_point(spec, &SelectionRule::min_norm_to(Point::from(center.clone())), tol)?.found()?;
    let kernel = spec.map.kernel_basis();
    if kernel.ncols() == 0 {
        return Ok(0.0);
    }
    let reach = 1e3 * (spec.body.radius() + (center.norm()) + 1.0);
    let select = |anchor: DVector<f64>| -> Result<Option<DVector<f64>>> {
        match fiber_point(spec, &SelectionRule::min_norm_to(Point::from(anchor)), tol).and_then(FiberPoint::found) {
            Ok(s) => Ok(Some(s.point.into_vector())),
            Err(Error::NonConvergence { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let extremes = |d: &DVector<f64>| -> Result<Option<(DVector<f64>, DVector<f64>)>> {
        let Some(hi) = select(first.point.as_vector() + d * reach)? else { return Ok(None) };
        let Some(lo) = select(first.point.as_vector() - d * reach)? else { return Ok(None) };
        Ok(Some((hi, lo)))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<DVector<f64>> = (0..n_dirs)
        .map(|_| {
            let g = DVector::from_fn(kernel.ncols(), |_, _| StandardNormal.sample(&mut rng));
            let d = kernel * g;
            let norm = d.norm();
            if norm > 0.0 { d / norm } else { DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }) }
        })
        .collect();
    let pairs: Vec<Option<(DVector<f64>, DVector<f64>)>> = dirs.par_iter().map(extremes).collect::<Result<_>>()?;
    let Some((mut best, mut pair)) = pairs
        .into_iter()
        .flatten()
        .map(|(a, b)| ((&a - &b).norm(), (a, b)))
        .max_by(|x, y| x.0.total_cmp(&y.0))
    else {
        return Ok(0.0);
    };
    for _ in 0..5 {
        if !(best > 0.0) {
            break;
        }
        let d = (&pair.0 - &pair.1) / best;
        let Some((a, b)) = extremes(&d)? else { break };
        let len = (&a - &b).norm();
        if len <= best * (1.0 + 1e-12) {
            break;
        }
        best = len;
        pair = (a, b);
    }
    Ok(best)
}
