mod common;

use std::f64::consts::PI;

use common::*;
use minksplit::geometry::support;
use minksplit::linmaps::make_sum_map;
use minksplit::splitting::continuity_report;
use minksplit::{
    default_tolerance, split, split_sampled_map, ConvexBody, Ellipsoid, Error, Point, ProductMap, SampledMap,
    SelectionRule, SplitOptions,
};
use nalgebra::DMatrix;
use rand::Rng;

const TOL: f64 = 1e-9;

fn disk(c: &[f64], r: f64) -> ConvexBody {
    Ellipsoid::ball(p(c), r).unwrap().into()
}

fn unit_disk() -> ConvexBody {
    disk(&[0.0, 0.0], 1.0)
}

#[test]
fn split_examples() {
    let l = make_sum_map(2).unwrap();
    let s = split(&unit_disk(), &unit_disk(), &l, &p(&[2.0, 0.0]), &SelectionRule::origin(4), TOL).unwrap();
    assert!(s.a.distance(&p(&[1.0, 0.0])) < 1e-6 && s.b.distance(&p(&[1.0, 0.0])) < 1e-6);

    let big = disk(&[0.0, 0.0], 2.0);
    let s = split(&unit_disk(), &big, &l, &p(&[3.0, 0.0]), &SelectionRule::origin(4), TOL).unwrap();
    assert!(s.a.distance(&p(&[1.0, 0.0])) < 1e-6 && s.b.distance(&p(&[2.0, 0.0])) < 1e-6, "{s:?}");

    let s = split(&unit_disk(), &unit_disk(), &l, &p(&[0.0, 0.0]), &SelectionRule::origin(4), TOL).unwrap();
    assert!(s.a.as_vector().norm() < 1e-9 && s.b.as_vector().norm() < 1e-9);
    assert!(s.residual <= TOL && s.body_violation <= TOL);
}

#[test]
fn split_rejects_bad_inputs() {
    let l = make_sum_map(2).unwrap();
    let r = split(&unit_disk(), &unit_disk(), &l, &p(&[2.5, 0.0]), &SelectionRule::origin(4), TOL);
    assert!(matches!(r, Err(Error::EmptyFiber { .. })));
    let r = split(&disk(&[0.0, 0.0, 0.0], 1.0), &unit_disk(), &l, &p(&[0.0, 0.0]), &SelectionRule::origin(4), TOL);
    assert!(r.is_err());
}

#[test]
fn constant_map_has_constant_split() {
    let l = make_sum_map(2).unwrap();
    let f = SampledMap::path(vec![p(&[0.4, -0.3]); 25], true).unwrap();
    let a = random_polytope(&mut rng(41), 2, 7).into();
    let b = unit_disk();
    let c = Point::from(minksplit::geometry::project_point(&a, &p(&[0.0, 0.0])).unwrap().as_vector() + p(&[0.4, -0.3]).as_vector());
    let f = SampledMap { values: vec![c; f.len()], ..f };
    let splits = split_sampled_map(&a, &b, &l, &f, &SelectionRule::origin(4), SplitOptions::default()).unwrap();
    let report = continuity_report(&splits, &f.edges, &l).unwrap();
    assert!(report.max_jump <= 1e-12, "{}", report.max_jump);
}

#[test]
fn circle_path_splits_evenly_between_equal_disks() {
    let l = make_sum_map(2).unwrap();
    let values: Vec<Point> = (0..200)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 200.0;
            p(&[0.99 * t.cos(), 0.99 * t.sin()])
        })
        .collect();
    let f = SampledMap::path(values.clone(), true).unwrap();
    let splits = split_sampled_map(&unit_disk(), &unit_disk(), &l, &f, &SelectionRule::origin(4), SplitOptions::default()).unwrap();
    for (s, c) in splits.iter().zip(&values) {
        let half = Point::from(c.as_vector() * 0.5);
        assert!(s.a.distance(&half) < 1e-6 && s.b.distance(&half) < 1e-6);
    }
    let report = continuity_report(&splits, &f.edges, &l).unwrap();
    // neighbouring targets are 0.99 * 2π/200 apart; each half moves half that
    assert!(report.max_jump < 0.99 * 2.0 * PI / 200.0, "{}", report.max_jump);
    assert!(report.max_fiber_jump < 1e-6);
}

#[test]
fn splits_are_translation_equivariant() {
    let mut rng = rng(42);
    let l = make_sum_map(3).unwrap();
    for _ in 0..10 {
        let a = random_polytope(&mut rng, 3, 8);
        let b = random_ellipsoid(&mut rng, 3, 0.5, 1.5);
        let c = Point::from(random_body_point(&mut rng, &a).as_vector() + b.center());
        let anchor = Point::from(gaussian(&mut rng, 6));
        let u = Point::from(gaussian(&mut rng, 3));
        let v = Point::from(gaussian(&mut rng, 3));
        let (a, b): (ConvexBody, ConvexBody) = (a.into(), b.into());
        let s = split(&a, &b, &l, &c, &SelectionRule::min_norm_to(anchor.clone()), TOL).unwrap();
        let moved = split(
            &a.translate(&u).unwrap(),
            &b.translate(&v).unwrap(),
            &l,
            &Point::from(c.as_vector() + u.as_vector() + v.as_vector()),
            &SelectionRule::min_norm_to(Point::from(anchor.as_vector() + u.concat(&v).as_vector())),
            TOL,
        )
        .unwrap();
        assert!((moved.a.as_vector() - u.as_vector() - s.a.as_vector()).norm() < 1e-6);
        assert!((moved.b.as_vector() - v.as_vector() - s.b.as_vector()).norm() < 1e-6);
    }
}

#[test]
fn rank_one_map_splits_a_thousand_targets() {
    let mut rng = rng(43);
    let a: ConvexBody = random_polytope(&mut rng, 3, 8).into();
    let b: ConvexBody = random_ellipsoid(&mut rng, 2, 0.5, 2.0).into();
    let l = ProductMap::new(DMatrix::from_row_slice(1, 3, &[1.0, -0.5, 2.0]), DMatrix::from_row_slice(1, 2, &[0.7, 1.0])).unwrap();
    // image of A × B under l is [lo, hi]
    let h = |sign: f64| {
        let da = Point::from(l.left().row(0).transpose() * sign);
        let db = Point::from(l.right().row(0).transpose() * sign);
        support(&a, &da).unwrap().0 + support(&b, &db).unwrap().0
    };
    let (lo, hi) = (-h(-1.0), h(1.0));
    let values: Vec<Point> = (0..1000).map(|_| p(&[rng.random_range(lo..hi)])).collect();
    let f = SampledMap::path(values, false).unwrap();
    let opts = SplitOptions::default();
    let splits = split_sampled_map(&a, &b, &l, &f, &SelectionRule::origin(5), opts).unwrap();
    let tol = default_tolerance();
    for (s, c) in splits.iter().zip(&f.values) {
        assert!(s.residual <= tol && s.body_violation <= tol);
        assert!((l.apply(&s.a, &s.b).unwrap()[0] - c[0]).abs() <= tol);
    }
}

#[test]
fn failing_sample_reports_its_id() {
    let l = make_sum_map(2).unwrap();
    let f = SampledMap::new(
        vec!["inside".into(), "outside".into()],
        vec![p(&[0.5, 0.0]), p(&[5.0, 0.0])],
        vec![(0, 1)],
    )
    .unwrap();
    let err = split_sampled_map(&unit_disk(), &unit_disk(), &l, &f, &SelectionRule::origin(4), SplitOptions::default())
        .unwrap_err();
    match &err {
        Error::Sample { id, .. } => assert_eq!(id, "outside"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(err.root(), Error::EmptyFiber { .. }));
    assert!(SampledMap::new(vec![], vec![], vec![]).is_err());
    assert!(SampledMap::new(vec!["x".into(), "x".into()], vec![p(&[0.0]), p(&[1.0])], vec![]).is_err());
}

#[test]
fn tracking_stays_in_the_fiber() {
    let l = make_sum_map(2).unwrap();
    let values: Vec<Point> = (0..50).map(|k| p(&[0.02 * k as f64, 0.0])).collect();
    let f = SampledMap::path(values, false).unwrap();
    let opts = SplitOptions { tracking: true, ..SplitOptions::default() };
    let splits = split_sampled_map(&unit_disk(), &disk(&[0.0, 0.0], 0.5), &l, &f, &SelectionRule::origin(4), opts).unwrap();
    for (s, c) in splits.iter().zip(&f.values) {
        assert!(s.residual <= opts.tol && s.body_violation <= opts.tol);
        assert!(s.a.distance(&Point::from(c.as_vector() - s.b.as_vector())) <= 1e-9);
    }
}
