//! The nine acceptance criteria, one test each. Every test writes a
//! `ACCEPTANCE k: PASS|FAIL ...` line to stderr before asserting.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use minksplit::fibers::{fiber_diameter, fiber_point, FiberSpec, SelectionRule};
use minksplit::gallery::{self, Verdict};
use minksplit::linmaps::{transversality_check, Transversality};
use minksplit::splitting::ContinuityReport;
use minksplit::{ConvexBody, LinearMap, Point, Polytope, ProductBody, ProductMap, SampledMap, SplitOptions};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const TOL: f64 = 1e-8;

fn check(criterion: u32, pass: bool, detail: String) {
    report(criterion, pass, &detail);
    assert!(pass, "criterion {criterion}: {detail}");
}

fn within(start: Instant, limit: Duration) -> (bool, f64) {
    let secs = start.elapsed().as_secs_f64();
    (secs <= limit.as_secs_f64(), secs)
}

#[test]
fn criterion_1_spiral_jump() {
    let start = Instant::now();
    let exp = gallery::spiral_jump_experiment(720, 0.01).unwrap();
    let (z0, z1) = (exp.first()[2], exp.last()[2]);
    let spec = FiberSpec::new(
        ConvexBody::from(gallery::spiral_body(720).unwrap()),
        gallery::vertical_projection(),
        p(&[1.0, 0.0]),
    )
    .unwrap();
    let diam = fiber_diameter(&spec, 20, 0, TOL).unwrap();
    let (fast, secs) = within(start, Duration::from_secs(30));
    let pass = z0.abs() <= 0.05 && (z1 - 2.0 * PI).abs() <= 0.05 && diam >= 2.0 * PI - 0.05 && fast;
    check(
        1,
        pass,
        format!("first z = {z0:.6}, last z = {z1:.6}, fiber diameter over (1,0) = {diam:.6}, {secs:.2}s"),
    );
}

#[test]
fn criterion_2_no_selection_certificate() {
    let start = Instant::now();
    let c = gallery::spiral_body(720).unwrap();
    let targets: Vec<Point> = (1..=50)
        .map(|m| gallery::polygon_boundary_point(720, 2.0 * PI - 1.0 / m as f64))
        .collect();
    let r = gallery::openness_probe(
        &ProductBody::from(ConvexBody::from(c)),
        &gallery::vertical_projection(),
        &p(&[1.0, 0.0, 0.0]),
        &targets,
        TOL,
    )
    .unwrap();
    let (fast, secs) = within(start, Duration::from_secs(30));
    let pass = matches!(r.verdict, Verdict::NotOpenAt { epsilon } if epsilon >= 6.0) && fast;
    check(2, pass, format!("verdict {:?}, {secs:.2}s", r.verdict));
}

#[test]
fn criterion_3_flat_variant_contrast() {
    let exp = gallery::remark2_jump_experiment(720, 0.01).unwrap();
    let r = &exp.report;
    check(
        3,
        r.max_fiber_jump <= 1e-3,
        format!(
            "max selection jump along the kernel = {:.3e} (raw jump incl. target motion = {:.3e})",
            r.max_fiber_jump, r.max_jump
        ),
    );
}

#[test]
fn criterion_4_transversality() {
    let square = Polytope::hull(&[p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0]), p(&[0.0, 1.0])]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let diamond = Polytope::hull(&[p(&[s, 0.0]), p(&[0.0, s]), p(&[-s, 0.0]), p(&[0.0, -s])]).unwrap();
    let px = LinearMap::from_rows(&[vec![1.0, 0.0]]).unwrap();

    let t = Instant::now();
    let sq = transversality_check(&square, &px).unwrap();
    let (f1, s1) = within(t, Duration::from_secs(5));
    let t = Instant::now();
    let rot = transversality_check(&diamond, &px).unwrap();
    let (f2, s2) = within(t, Duration::from_secs(5));
    let t = Instant::now();
    let spiral = gallery::spiral_body(720).unwrap();
    let sp = transversality_check(&spiral, &gallery::vertical_projection()).unwrap();
    let (f3, s3) = within(t, Duration::from_secs(5));

    let (lo, hi) = (p(&[1.0, 0.0, 0.0]), p(&[1.0, 0.0, 2.0 * PI]));
    let chord_ok = match &sp {
        Transversality::Fail { chord: Some((a, b)), .. } => {
            (a.distance(&lo) < 1e-9 && b.distance(&hi) < 1e-9) || (a.distance(&hi) < 1e-9 && b.distance(&lo) < 1e-9)
        }
        _ => false,
    };
    let pass = !sq.passed() && rot.passed() && chord_ok && f1 && f2 && f3;
    let chord = match &sp {
        Transversality::Fail { chord: Some((a, b)), .. } => format!("{a}-{b}"),
        _ => "none".into(),
    };
    check(
        4,
        pass,
        format!(
            "square {} ({s1:.2}s), rotated square {} ({s2:.2}s), spiral {} with chord {chord} ({s3:.2}s)",
            if sq.passed() { "pass" } else { "fail" },
            if rot.passed() { "pass" } else { "fail" },
            if sp.passed() { "pass" } else { "fail" },
        ),
    );
}

/// Smooth curve `t ↦ Σₖ αₖ cos(2πkt) + βₖ sin(2πkt)` scaled into the ball
/// of radius 0.95.
fn fourier_curve(rng: &mut TestRng, d: usize) -> impl Fn(f64) -> DVector<f64> + Sync {
    let coef: Vec<(DVector<f64>, DVector<f64>)> = (0..4).map(|_| (gaussian(rng, d), gaussian(rng, d))).collect();
    let raw = move |t: f64| -> DVector<f64> {
        coef.iter().enumerate().fold(DVector::zeros(d), |acc, (k, (a, b))| {
            let w = 2.0 * PI * k as f64 * t;
            acc + a * w.cos() + b * w.sin()
        })
    };
    let peak = (0..=4000).map(|i| raw(i as f64 / 4000.0).norm()).fold(0.0, f64::max);
    let scale = 0.95 / peak.max(1e-12) * 0.999;
    move |t| raw(t) * scale
}

#[test]
fn criterion_5_minkowski_continuity() {
    let start = Instant::now();
    let mut rng = rng(5);
    let mut ratios = Vec::new();
    let mut worst_residual: f64 = 0.0;
    for k in 0..20 {
        let d = 2 + k % 3;
        let a = random_ellipsoid(&mut rng, d, 0.3, 2.0);
        let b = random_ellipsoid(&mut rng, d, 0.3, 2.0);
        let (la, lb) = (
            a.shape().clone().cholesky().unwrap().l(),
            b.shape().clone().cholesky().unwrap().l(),
        );
        let (ua, ub) = (fourier_curve(&mut rng, d), fourier_curve(&mut rng, d));
        let (ca, cb) = (a.center().clone(), b.center().clone());
        let path = move |t: f64| Point::from(&ca + &la * ua(t) + &cb + &lb * ub(t));
        let r = gallery::ellipsoid_refinement_experiment(&a, &b, &path, 1000, TOL).unwrap();
        worst_residual = worst_residual.max(r.max_residual);
        ratios.push(r.fine.refinement_ratio.unwrap());
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (fast, secs) = within(start, Duration::from_secs(300));
    let pass = worst_residual <= 1e-8 && mean <= 0.75 && fast;
    check(
        5,
        pass,
        format!("max residual {worst_residual:.2e}, mean refinement ratio {mean:.4}, {secs:.1}s"),
    );
}

#[test]
fn criterion_6_schauder_truncations() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut min_dist = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for big_n in [5usize, 10, 20, 40] {
        let c = gallery::schauder_body(big_n).unwrap();
        let body = ConvexBody::from(c.clone());
        let l = gallery::schauder_map(big_n).unwrap();
        let e1 = Point::unit(big_n, 0);
        for n in 2..=big_n {
            let y = gallery::schauder_target(big_n, n, 1.0).unwrap();
            let plus = FiberSpec::new(body.clone(), l.clone(), y.clone()).unwrap();
            let minus = plus.with_target(gallery::schauder_target(big_n, n, -1.0).unwrap()).unwrap();
            let sp = fiber_point(&plus, &SelectionRule::origin(big_n), TOL).unwrap().found().unwrap();
            let sm = fiber_point(&minus, &SelectionRule::origin(big_n), TOL).unwrap().found().unwrap();
            let dp = fiber_diameter(&plus, 4, 0, TOL).unwrap();
            let dm = fiber_diameter(&minus, 4, 0, TOL).unwrap();
            if sp.point.distance(&gallery::schauder_generator(big_n, n, false)) > 1e-6
                || sm.point.distance(&gallery::schauder_generator(big_n, n, true)) > 1e-6
                || dp > 1e-6
                || dm > 1e-6
            {
                failures.push(format!("N={big_n} n={n}: fibers not singletons ({dp:e}, {dm:e})"));
            }
            let dist = minksplit::dist_to_fiber(&e1, &plus, TOL).unwrap();
            min_dist = min_dist.min(dist);
            if dist < 0.9 || y.norm() > 1.0 / n as f64 + 1e-15 {
                failures.push(format!("N={big_n} n={n}: dist(e1, fiber) = {dist}"));
            }
            for lam in [0.1, 0.5, 1.0] {
                let mut z = gallery::schauder_generator(big_n, n, false).into_vector();
                z[0] += lam;
                let measured = body.distance(&Point::from(z)).unwrap();
                let bound = gallery::lemma25_bound(lam, n, 1.0, 1.0).unwrap();
                min_margin = min_margin.min(measured - bound);
                if measured < bound - 1e-6 {
                    failures.push(format!("N={big_n} n={n} lambda={lam}: {measured} < {bound}"));
                }
            }
        }
    }
    let (fast, secs) = within(start, Duration::from_secs(300));
    let pass = failures.is_empty() && fast;
    check(
        6,
        pass,
        format!(
            "min dist(e1, fiber) = {min_dist:.6}, min (distance - bound) = {min_margin:.3e}, {} failures {:?}, {secs:.1}s",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7_one_dimensional_range() {
    let start = Instant::now();
    let mut rng = rng(7);
    let mut not_open = Vec::new();
    let mut probes = 0;
    for k in 0..50 {
        let c = random_polytope(&mut rng, 4, 6 + k % 7);
        let l = random_map(&mut rng, 1, 4);
        let w = l.matrix() * c.vertex_matrix();
        let (lo, hi) = (w.min(), w.max());
        let body = ProductBody::from(ConvexBody::from(c.clone()));
        for _ in 0..10 {
            let z = random_body_point(&mut rng, &c);
            let s = l.apply(&z).unwrap()[0];
            let dir = if s - lo > hi - s { -1.0 } else { 1.0 };
            let targets: Vec<Point> = (0..13)
                .map(|j| p(&[s + dir * (hi - lo) / 4.0 * 0.5f64.powi(j)]))
                .collect();
            let r = gallery::openness_probe(&body, &l, &z, &targets, TOL).unwrap();
            probes += 1;
            if r.verdict != Verdict::OpenAt {
                not_open.push((k, r.verdict));
            }
        }
    }
    let (fast, secs) = within(start, Duration::from_secs(300));
    let pass = not_open.is_empty() && fast;
    check(
        7,
        pass,
        format!("{probes} probes, {} not open {:?}, {secs:.1}s", not_open.len(), not_open.iter().take(3).collect::<Vec<_>>()),
    );
}

#[test]
fn criterion_8_fiber_solver_vs_oracle() {
    let mut rng = rng(8);
    let mut worst_gap: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;
    for k in 0..100 {
        let d = 2 + k % 3;
        let nv = rng.random_range(d + 1..=12);
        let c = random_polytope(&mut rng, d, nv);
        let m = rng.random_range(1..d);
        let l = random_map(&mut rng, m, d);
        let y = l.apply(&random_body_point(&mut rng, &c)).unwrap();
        let anchor = Point::from(gaussian(&mut rng, d) * 2.0);
        let spec = FiberSpec::new(ConvexBody::from(c.clone()), l.clone(), y.clone()).unwrap();
        let s = fiber_point(&spec, &SelectionRule::min_norm_to(anchor.clone()), TOL).unwrap().found().unwrap();
        let want = oracle_fiber_point(c.vertex_matrix(), l.matrix(), y.as_vector(), anchor.as_vector()).unwrap();
        worst_gap = worst_gap.max((s.anchor_distance - (want - anchor.as_vector()).norm()).abs());
        worst_residual = worst_residual.max(s.residual);
        worst_violation = worst_violation.max(s.body_violation);
    }
    let pass = worst_gap <= 1e-4 && worst_residual <= 1e-8 && worst_violation <= 1e-8;
    check(
        8,
        pass,
        format!(
            "100 instances: max anchor-distance gap {worst_gap:.2e}, max residual {worst_residual:.2e}, max body violation {worst_violation:.2e}"
        ),
    );
}

#[test]
fn criterion_9_spiral_segment_split() {
    let n = 720;
    let a = ConvexBody::from(gallery::spiral_body(n).unwrap());
    let b = ConvexBody::from(Polytope::hull(&[p(&[0.0]), p(&[1.0])]).unwrap());
    let l = ProductMap::new(
        DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        DMatrix::zeros(2, 1),
    )
    .unwrap();
    let angles = gallery::boundary_angles(0.01, gallery::DEFAULT_PATH_SAMPLES);
    let values = angles.iter().map(|&t| gallery::polygon_boundary_point(n, t)).collect();
    let f = SampledMap::path(values, true).unwrap();
    let rule = SelectionRule::origin(4);
    let splits = minksplit::split_sampled_map(&a, &b, &l, &f, &rule, SplitOptions { tol: TOL, tracking: false }).unwrap();
    let f1: Vec<Point> = splits.iter().map(|s| s.a.clone()).collect();
    let r = ContinuityReport::from_points(&f1, &f.edges, None).unwrap();
    let worst_residual = splits.iter().map(|s| s.residual).fold(0.0, f64::max);
    check(
        9,
        r.max_jump >= 6.0,
        format!("max jump of f1 along the boundary = {:.6} (edge {:?}), max residual {worst_residual:.1e}", r.max_jump, r.argmax().map(|k| r.edges[k])),
    );
}
