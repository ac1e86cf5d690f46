//! Named bodies and diagnostic experiments.
//!
//! - The spiral body: the hull of one turn of the helix `(cos t, sin t, t)`.
//!   Its vertical projection is single-valued over the boundary of the disk
//!   except over `(1, 0)`, where the fiber is the segment from `(1,0,0)` to
//!   `(1,0,2π)`, so no continuous selection of the inverse exists.
//! - A flat variant (the disk with one lifted point over `(1, 0)`) whose
//!   inverse does admit a continuous selection.
//! - Finite truncations of a Schauder-type body in `R^N` with center of
//!   symmetry `e₁`, on which the coordinate projection forgetting `x₁`
//!   loses openness at `e₁` at a rate growing with `N`.
//!
//! The boundary of the projected spiral (and of the flat variant) is the
//! inscribed regular `n`-gon, so path experiments walk that polygon rather
//! than the unit circle.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fibers::{dist_to_fiber, fiber_point, FiberSpec, SelectionRule};
use crate::geometry::{convex_hull, ConvexBody, Ellipsoid, Point, Polytope, ProductBody};
use crate::linmaps::{make_sum_map, LinearMap};
use crate::splitting::{split_sampled_map, ContinuityReport, SampledMap, SplitOptions};

pub const SPIRAL_MIN_N: usize = 4;
pub const REMARK2_MIN_N: usize = 8;
pub const SCHAUDER_MAX_N: usize = 64;
pub const DEFAULT_SPIRAL_N: usize = 720;
pub const DEFAULT_DELTA: f64 = 0.01;
/// Path samples used by [`spiral_jump_experiment`].
pub const DEFAULT_PATH_SAMPLES: usize = 1000;

/// `(cos t, sin t, t)`.
pub fn spiral_point(t: f64) -> Point {
    Point::from(nalgebra::DVector::from_vec(vec![t.cos(), t.sin(), t]))
}

/// Hull of `(cos tₖ, sin tₖ, tₖ)`, `tₖ = 2πk/n`, `k = 0..=n`. The last
/// sample is set to exactly `(1, 0, 2π)`.
pub fn spiral_body(n: usize) -> Result<Polytope> {
    if n < SPIRAL_MIN_N {
        return Err(Error::InvalidInput(format!("spiral needs n >= {SPIRAL_MIN_N}, got {n}")));
    }
    let mut pts: Vec<Point> = (0..n).map(|k| spiral_point(2.0 * PI * k as f64 / n as f64)).collect();
    pts.push(Point::from(nalgebra::DVector::from_vec(vec![1.0, 0.0, 2.0 * PI])));
    convex_hull(&pts)
}

/// Hull of the `n`-gon `(cos tₖ, sin tₖ, 0)` together with `(1, 0, 1)`.
pub fn remark2_body(n: usize) -> Result<Polytope> {
    if n < REMARK2_MIN_N {
        return Err(Error::InvalidInput(format!("remark2 body needs n >= {REMARK2_MIN_N}, got {n}")));
    }
    let mut pts: Vec<Point> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            Point::from(nalgebra::DVector::from_vec(vec![t.cos(), t.sin(), 0.0]))
        })
        .collect();
    pts.push(Point::from(nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0])));
    convex_hull(&pts)
}

/// `(x, y, z) ↦ (x, y)`.
pub fn vertical_projection() -> LinearMap {
    LinearMap::coordinate_projection(3, 2).expect("full rank")
}

/// Point of the boundary of the regular `n`-gon with vertices at angles
/// `2πk/n` on the unit circle, in direction `θ`.
pub fn polygon_boundary_point(n: usize, theta: f64) -> Point {
    let step = 2.0 * PI / n as f64;
    let th = theta.rem_euclid(2.0 * PI);
    let k = (th / step).floor().min(n as f64 - 1.0);
    let r = (PI / n as f64).cos() / (th - (k + 0.5) * step).cos();
    Point::from(nalgebra::DVector::from_vec(vec![r * th.cos(), r * th.sin()]))
}

fn check_schauder(n_max: usize) -> Result<()> {
    if !(2..=SCHAUDER_MAX_N).contains(&n_max) {
        return Err(Error::InvalidInput(format!(
            "Schauder truncation needs 2 <= N <= {SCHAUDER_MAX_N}, got {n_max}"
        )));
    }
    Ok(())
}

/// `eₙ/n` (`upper = false`) or `2e₁ − eₙ/n` (`upper = true`) in `R^N`.
pub fn schauder_generator(n_max: usize, n: usize, upper: bool) -> Point {
    let mut v = nalgebra::DVector::zeros(n_max);
    v[n - 1] = 1.0 / n as f64;
    if upper {
        v = -v;
        v[0] += 2.0;
    }
    Point::from(v)
}

/// Hull of `{eₙ/n, 2e₁ − eₙ/n : n = 1..N}` in `R^N`. Both generators for
/// `n = 1` equal `e₁`, the center of symmetry, which is not extreme; the
/// body has `2N − 2` vertices.
pub fn schauder_body(n_max: usize) -> Result<Polytope> {
    check_schauder(n_max)?;
    let pts: Vec<Point> = (1..=n_max)
        .flat_map(|n| [schauder_generator(n_max, n, false), schauder_generator(n_max, n, true)])
        .collect();
    convex_hull(&pts)
}

/// The projection `x ↦ x − x₁e₁`, written in the coordinates `(x₂, …, x_N)`
/// of its range so that it is surjective.
pub fn schauder_map(n_max: usize) -> Result<LinearMap> {
    check_schauder(n_max)?;
    let mut m = DMatrix::zeros(n_max - 1, n_max);
    for i in 0..n_max - 1 {
        m[(i, i + 1)] = 1.0;
    }
    LinearMap::new(m)
}

/// `±eₙ/n` in the range coordinates of [`schauder_map`], `2 ≤ n ≤ N`.
pub fn schauder_target(n_max: usize, n: usize, sign: f64) -> Result<Point> {
    check_schauder(n_max)?;
    if !(2..=n_max).contains(&n) {
        return Err(Error::InvalidInput(format!("index n = {n} outside 2..={n_max}")));
    }
    let mut v = nalgebra::DVector::zeros(n_max - 1);
    v[n - 2] = sign / n as f64;
    Ok(Point::from(v))
}

/// `min(λ / (3 n ‖Pₙ‖), λ / (3 ‖P₁‖))`: a lower bound on the distance from
/// `λe₁ + eₙ/n` to the Schauder-type body.
pub fn lemma25_bound(lambda: f64, n: usize, norm_p1: f64, norm_pn: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be > 1, got {n}")));
    }
    if !(norm_p1 > 0.0 && norm_pn > 0.0) {
        return Err(Error::InvalidInput("projection norms must be positive".into()));
    }
    Ok((lambda / (3.0 * n as f64 * norm_pn)).min(lambda / (3.0 * norm_p1)))
}

/// One target of an openness probe.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeTarget {
    pub y: Point,
    /// `‖y − L(z)‖`.
    pub offset: f64,
    /// `dist(z, fiber over y)`; `None` when the fiber is empty.
    pub dist: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    OpenAt,
    NotOpenAt { epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub base_point: Point,
    pub image: Point,
    pub targets: Vec<ProbeTarget>,
    pub verdict: Verdict,
}

/// Targets closer than this to `L(z)` all join the tail.
pub const PROBE_WINDOW: f64 = 1e-3;
/// Minimum number of targets in the tail.
pub const PROBE_TAIL: usize = 5;

/// Fiber distances from `z` over each target, and a verdict on openness
/// of `L|_C` at `z`.
///
/// The feasible targets are ordered by offset from `L(z)`; the tail is the
/// `PROBE_TAIL` closest ones, extended to every target within
/// `PROBE_WINDOW`. With `ε` the smallest tail distance, the verdict is
/// `NotOpenAt(ε)` when
///
/// - `ε ≥ 10·tol`,
/// - the tail is genuinely closer than the bulk: the median offset is at
///   least 1.25 times the largest tail offset, and
/// - distances do not decay: with `ρ` the ratio of the largest tail offset
///   to the median offset, `ε` exceeds `ρ^(1/4)` times the distance at the
///   median-offset target. Decay like `offset^(1/4)` or faster counts as
///   open.
///
/// Otherwise, and whenever fewer than `PROBE_TAIL` targets are feasible,
/// the verdict is `OpenAt`.
pub fn openness_probe(
    body: &ProductBody,
    l: &LinearMap,
    z: &Point,
    targets: &[Point],
    tol: f64,
) -> Result<ProbeReport> {
    Error::check_dim(l.cols(), body.dim())?;
    Error::check_dim(l.cols(), z.dim())?;
    let off = body.distance(z)?;
    if off > tol {
        return Err(Error::InvalidInput(format!("base point is at distance {off:e} from the body")));
    }
    let image = l.apply(z)?;
    for y in targets {
        Error::check_dim(l.rows(), y.dim())?;
    }
    let spec = FiberSpec::new(body.clone(), l.clone(), image.clone())?;
    let rows: Vec<ProbeTarget> = targets
        .par_iter()
        .map(|y| -> Result<ProbeTarget> {
            let s = spec.with_target(y.clone())?;
            let dist = match dist_to_fiber(z, &s, tol) {
                Ok(d) => Some(d),
                Err(Error::EmptyFiber { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(ProbeTarget {
                offset: y.distance(&image),
                y: y.clone(),
                dist,
            })
        })
        .collect::<Result<_>>()?;
    let verdict = probe_verdict(&rows, tol);
    Ok(ProbeReport {
        base_point: z.clone(),
        image,
        targets: rows,
        verdict,
    })
}

fn probe_verdict(rows: &[ProbeTarget], tol: f64) -> Verdict {
    let mut feasible: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.dist.map(|d| (r.offset, d))).collect();
    if feasible.len() < PROBE_TAIL {
        return Verdict::OpenAt;
    }
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0));
    let window = feasible.iter().take_while(|r| r.0 <= PROBE_WINDOW).count();
    let tail = &feasible[..window.max(PROBE_TAIL)];
    let epsilon = tail.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_tail_offset = tail.last().expect("nonempty tail").0;
    let median = feasible[feasible.len() / 2];
    let converging = median.0 >= 1.25 * max_tail_offset;
    let no_decay = epsilon > (max_tail_offset / median.0).powf(0.25) * median.1;
    if epsilon >= 10.0 * tol && converging && no_decay {
        Verdict::NotOpenAt { epsilon }
    } else {
        Verdict::OpenAt
    }
}

/// Selections along a path of targets.
#[derive(Clone, Debug)]
pub struct PathExperiment {
    pub angles: Vec<f64>,
    pub targets: Vec<Point>,
    pub selections: Vec<Point>,
    /// Over the closed path, with fiber jumps in the kernel of the map.
    pub report: ContinuityReport,
}

impl PathExperiment {
    pub fn first(&self) -> &Point {
        &self.selections[0]
    }

    pub fn last(&self) -> &Point {
        self.selections.last().expect("nonempty path")
    }
}

/// `samples` angles equally spaced on `[δ, 2π − δ]`.
pub fn boundary_angles(delta: f64, samples: usize) -> Vec<f64> {
    let span = 2.0 * PI - 2.0 * delta;
    (0..samples)
        .map(|i| delta + span * i as f64 / (samples - 1) as f64)
        .collect()
}

fn check_path(delta: f64, samples: usize) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 0.5), got {delta}")));
    }
    if samples < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 path samples, got {samples}")));
    }
    Ok(())
}

/// Min-norm selections (anchor `0`) of the vertical projection of `body`
/// along the boundary of the `n`-gon at angles `[δ, 2π − δ]`.
pub fn polygon_path_experiment(
    body: &Polytope,
    n: usize,
    delta: f64,
    samples: usize,
    tol: f64,
) -> Result<PathExperiment> {
    check_path(delta, samples)?;
    Error::check_dim(3, body.dim())?;
    let l = vertical_projection();
    let angles = boundary_angles(delta, samples);
    let targets: Vec<Point> = angles.iter().map(|&t| polygon_boundary_point(n, t)).collect();
    let spec = FiberSpec::new(ConvexBody::from(body.clone()), l.clone(), targets[0].clone())?;
    let rule = SelectionRule::origin(3);
    let selections: Vec<Point> = targets
        .par_iter()
        .map(|y| Ok(fiber_point(&spec.with_target(y.clone())?, &rule, tol)?.found()?.point))
        .collect::<Result<_>>()?;
    let path = SampledMap::path(targets.clone(), true)?;
    let report = ContinuityReport::from_points(&selections, &path.edges, Some(l.kernel_basis()))?;
    Ok(PathExperiment {
        angles,
        targets,
        selections,
        report,
    })
}

/// The spiral path experiment with [`DEFAULT_PATH_SAMPLES`] samples. The
/// first and last selections approach `(1,0,0)` and `(1,0,2π)`; the
/// closing edge carries a jump of about `2π`.
pub fn spiral_jump_experiment(n: usize, delta: f64) -> Result<PathExperiment> {
    if n < 100 {
        return Err(Error::InvalidInput(format!("spiral experiment needs n >= 100, got {n}")));
    }
    let body = spiral_body(n)?;
    polygon_path_experiment(&body, n, delta, DEFAULT_PATH_SAMPLES, crate::default_tolerance())
}

/// The same path on the flat variant, where the selection is continuous.
pub fn remark2_jump_experiment(n: usize, delta: f64) -> Result<PathExperiment> {
    let body = remark2_body(n)?;
    polygon_path_experiment(&body, n, delta, DEFAULT_PATH_SAMPLES, crate::default_tolerance())
}

/// Coarse and fine continuity reports of a refinement experiment.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub coarse: ContinuityReport,
    /// Carries `refinement_ratio` against `coarse`.
    pub fine: ContinuityReport,
    /// Largest `‖a + b − c‖∞` over both runs.
    pub max_residual: f64,
}

/// Sum-map splits of `c(t)`, `t ∈ [0, 1]`, at `steps` and `2·steps`
/// intervals.
pub fn ellipsoid_refinement_experiment(
    a: &Ellipsoid,
    b: &Ellipsoid,
    path: &(dyn Fn(f64) -> Point + Sync),
    steps: usize,
    tol: f64,
) -> Result<Refinement> {
    if steps < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 steps, got {steps}")));
    }
    Error::check_dim(a.dim(), b.dim())?;
    let l = make_sum_map(a.dim())?;
    let (ca, cb) = (ConvexBody::from(a.clone()), ConvexBody::from(b.clone()));
    let rule = SelectionRule::origin(2 * a.dim());
    let opts = SplitOptions { tol, tracking: false };
    let run = |k: usize| -> Result<(ContinuityReport, f64)> {
        let values: Vec<Point> = (0..=k).map(|i| path(i as f64 / k as f64)).collect();
        let f = SampledMap::path(values, false)?;
        let splits = split_sampled_map(&ca, &cb, &l, &f, &rule, opts)?;
        let worst = splits.iter().map(|s| s.residual).fold(0.0, f64::max);
        Ok((crate::splitting::continuity_report(&splits, &f.edges, &l)?, worst))
    };
    let (coarse, r1) = run(steps)?;
    let (fine, r2) = run(2 * steps)?;
    Ok(Refinement {
        fine: fine.refined_from(&coarse),
        coarse,
        max_residual: r1.max(r2),
    })
}
