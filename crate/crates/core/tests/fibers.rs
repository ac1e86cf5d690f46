mod common;

use std::f64::consts::PI;

use common::*;
use minksplit::fibers::fiber_point_dykstra;
use minksplit::linmaps::make_sum_map;
use minksplit::{
    default_tolerance, dist_to_fiber, fiber_diameter, fiber_point, gallery, ConvexBody, Ellipsoid, Error,
    FiberPoint, FiberSpec, Point, ProductBody, SelectionRule,
};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

fn disk(c: &[f64], r: f64) -> ConvexBody {
    Ellipsoid::ball(p(c), r).unwrap().into()
}

fn disk_sum(target: &[f64]) -> FiberSpec {
    FiberSpec::product(disk(&[0.0, 0.0], 1.0), disk(&[0.0, 0.0], 1.0), &make_sum_map(2).unwrap(), p(target)).unwrap()
}

fn spiral_spec(target: &[f64]) -> FiberSpec {
    let c: ConvexBody = gallery::spiral_body(720).unwrap().into();
    FiberSpec::new(c, gallery::vertical_projection(), p(target)).unwrap()
}

fn select(spec: &FiberSpec, anchor: &[f64]) -> Point {
    fiber_point(spec, &SelectionRule::min_norm_to(p(anchor)), TOL).unwrap().found().unwrap().point
}

#[test]
fn disk_sum_at_the_boundary() {
    let x = select(&disk_sum(&[2.0, 0.0]), &[0.0; 4]);
    assert!(x.distance(&p(&[1.0, 0.0, 1.0, 0.0])) < 1e-6);
}

#[test]
fn spiral_fiber_examples() {
    let x = select(&spiral_spec(&[-1.0, 0.0]), &[0.0; 3]);
    assert!(x.distance(&p(&[-1.0, 0.0, PI])) < 1e-6, "{x:?}");
    let lo = select(&spiral_spec(&[1.0, 0.0]), &[0.0; 3]);
    assert!(lo.distance(&p(&[1.0, 0.0, 0.0])) < 1e-6, "{lo:?}");
    let hi = select(&spiral_spec(&[1.0, 0.0]), &[0.0, 0.0, 7.0]);
    assert!(hi.distance(&p(&[1.0, 0.0, 2.0 * PI])) < 1e-6, "{hi:?}");
}

#[test]
fn targets_outside_the_image_are_empty() {
    match fiber_point(&disk_sum(&[2.5, 0.0]), &SelectionRule::origin(4), TOL).unwrap() {
        FiberPoint::Empty { distance } => assert!(distance > 0.0 && distance <= 0.5 + 1e-9),
        other => panic!("expected empty, got {other:?}"),
    }
    let err = fiber_point(&spiral_spec(&[1.5, 0.0]), &SelectionRule::origin(3), TOL).unwrap().found();
    assert!(matches!(err, Err(Error::EmptyFiber { .. })));
    assert!(fiber_point(&disk_sum(&[0.0, 0.0]), &SelectionRule::origin(3), TOL).is_err());
    assert!(fiber_point(&disk_sum(&[0.0, 0.0]), &SelectionRule::origin(4), 0.0).is_err());
}

#[test]
fn diameter_examples() {
    let d = fiber_diameter(&disk_sum(&[0.0, 0.0]), 16, 0, TOL).unwrap();
    assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{d}");
    let d = fiber_diameter(&disk_sum(&[2.0, 0.0]), 16, 0, TOL).unwrap();
    assert!(d < 1e-3, "{d}");
    let d = fiber_diameter(&spiral_spec(&[1.0, 0.0]), 8, 0, TOL).unwrap();
    assert!((d - 2.0 * PI).abs() < 1e-6, "{d}");
    assert!(fiber_diameter(&disk_sum(&[0.0, 0.0]), 1, 0, TOL).is_err());
}

/// All points where a vertex segment crosses the level set `⟨w, x⟩ = y`.
fn crossing_points(c: &minksplit::Polytope, w: &[f64], y: f64) -> Vec<Point> {
    let vs = c.vertices();
    let f = |v: &Point| v.coords().iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
    let mut out = Vec::new();
    for (i, u) in vs.iter().enumerate() {
        for v in &vs[i..] {
            let (fu, fv) = (f(u), f(v));
            if (fu - y) * (fv - y) > 0.0 {
                continue;
            }
            let t = if (fv - fu).abs() < 1e-15 { 0.0 } else { (y - fu) / (fv - fu) };
            out.push(Point::from(u.as_vector() + (v.as_vector() - u.as_vector()) * t));
        }
    }
    out
}

#[test]
fn diameter_within_five_percent_of_crossing_oracle() {
    let mut rng = rng(31);
    for _ in 0..10 {
        let c = random_polytope(&mut rng, 3, 10);
        let l = random_map(&mut rng, 1, 3);
        let x = random_body_point(&mut rng, &c);
        let y = l.apply(&x).unwrap();
        let w: Vec<f64> = l.matrix().row(0).iter().copied().collect();
        let pts = crossing_points(&c, &w, y[0]);
        let mut want = 0.0_f64;
        for a in &pts {
            for b in &pts {
                want = want.max(a.distance(b));
            }
        }
        let spec = FiberSpec::new(ConvexBody::from(c), l, y).unwrap();
        let got = fiber_diameter(&spec, 32, 7, TOL).unwrap();
        assert!(got <= want + 1e-6 && got >= 0.95 * want, "got {got}, oracle {want}");
    }
}

#[test]
fn distance_to_fiber_examples() {
    let spec = disk_sum(&[0.0, 0.0]);
    assert!(dist_to_fiber(&p(&[0.3, 0.1, -0.3, -0.1]), &spec, TOL).unwrap() < 1e-6);
    assert!((dist_to_fiber(&p(&[0.0, 0.0, 1.0, 1.0]), &spec, TOL).unwrap() - 1.0).abs() < 1e-6);
    assert!(matches!(
        dist_to_fiber(&p(&[0.0; 4]), &disk_sum(&[3.0, 0.0]), TOL),
        Err(Error::EmptyFiber { .. })
    ));
}

#[test]
fn polytope_fibers_match_the_subset_oracle() {
    let mut rng = rng(32);
    for trial in 0..40 {
        let d = rng.random_range(2..=4);
        let c = random_polytope(&mut rng, d, 9);
        let m = rng.random_range(1..d);
        let l = random_map(&mut rng, m, d);
        let y = l.apply(&random_body_point(&mut rng, &c)).unwrap();
        let anchor = Point::from(gaussian(&mut rng, d) * 2.0);
        let want = oracle_fiber_point(c.vertex_matrix(), l.matrix(), y.as_vector(), anchor.as_vector()).unwrap();
        let spec = FiberSpec::new(ConvexBody::from(c), l, y).unwrap();
        let rule = SelectionRule::min_norm_to(anchor);
        let fast = fiber_point(&spec, &rule, TOL).unwrap().found().unwrap();
        let slow = fiber_point_dykstra(&spec, &rule, TOL).unwrap().found().unwrap();
        assert!((fast.point.as_vector() - &want).norm() < 1e-6, "trial {trial}: {fast:?}");
        assert!((slow.point.as_vector() - &want).norm() < 1e-5, "trial {trial}: {slow:?}");
    }
}

#[test]
fn newton_matches_dykstra_on_ellipsoid_products() {
    let mut rng = rng(33);
    for _ in 0..20 {
        let d = rng.random_range(1..=3);
        let a = random_ellipsoid(&mut rng, d, 0.3, 2.0);
        let b = random_ellipsoid(&mut rng, d, 0.3, 2.0);
        let l = make_sum_map(d).unwrap();
        // a point of A + B: sum of boundary or interior points
        let pa = minksplit::geometry::project_point(&a.clone().into(), &Point::from(gaussian(&mut rng, d) * 3.0)).unwrap();
        let pb = minksplit::geometry::project_point(&b.clone().into(), &Point::from(gaussian(&mut rng, d))).unwrap();
        let c = Point::from(pa.as_vector() + pb.as_vector());
        let spec = FiberSpec::product(a, b, &l, c).unwrap();
        let rule = SelectionRule::min_norm_to(Point::from(gaussian(&mut rng, 2 * d)));
        let newton = fiber_point(&spec, &rule, TOL).unwrap().found().unwrap();
        let dyk = fiber_point_dykstra(&spec, &rule, TOL).unwrap().found().unwrap();
        assert!(newton.point.distance(&dyk.point) < 1e-5, "{newton:?} vs {dyk:?}");
        assert!(newton.anchor_distance <= dyk.anchor_distance + 1e-7);
    }
}

#[test]
fn schauder_fiber_over_zero_is_the_center() {
    for n in [2, 5, 16] {
        let c: ConvexBody = gallery::schauder_body(n).unwrap().into();
        let spec = FiberSpec::new(c, gallery::schauder_map(n).unwrap(), Point::origin(n - 1)).unwrap();
        for anchor in [Point::unit(n, 0), Point::origin(n), Point::unit(n, n - 1)] {
            let x = fiber_point(&spec, &SelectionRule::min_norm_to(anchor), TOL).unwrap().found().unwrap();
            assert!(x.point.distance(&Point::unit(n, 0)) < 1e-7, "{x:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feasible_targets_give_certified_points(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.random_range(2..=4);
        let a = random_polytope(&mut rng, d, 6);
        let b: ConvexBody = if rng.random_bool(0.5) {
            random_polytope(&mut rng, d, 5).into()
        } else {
            random_ellipsoid(&mut rng, d, 0.3, 2.0).into()
        };
        let l = make_sum_map(d).unwrap();
        let xa = random_body_point(&mut rng, &a);
        let xb = minksplit::geometry::project_point(&b, &Point::from(gaussian(&mut rng, d))).unwrap();
        let c = Point::from(xa.as_vector() + xb.as_vector());
        let body = ProductBody::pair(a.into(), b);
        let spec = FiberSpec::new(body, l.to_linear_map(), c).unwrap();
        let tol = default_tolerance();
        let s = fiber_point(&spec, &SelectionRule::origin(2 * d), tol).unwrap().found().unwrap();
        prop_assert!(s.residual <= tol);
        prop_assert!(s.body_violation <= tol);
        let back = spec.map.apply(&s.point).unwrap();
        prop_assert!(back.distance(&spec.target) <= 10.0 * tol);
    }
}
