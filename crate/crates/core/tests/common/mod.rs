//! Random instances and a brute-force fiber oracle shared by the
//! integration tests.

#![allow(dead_code)]

use std::io::Write;

use minksplit::{ConvexBody, Ellipsoid, LinearMap, Point, Polytope};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut TestRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn p(c: &[f64]) -> Point {
    Point::from_slice(c).unwrap()
}

/// `n` Gaussian points in `R^d` and their hull.
pub fn random_polytope(rng: &mut TestRng, d: usize, n: usize) -> Polytope {
    let pts: Vec<Point> = (0..n).map(|_| Point::from(gaussian(rng, d))).collect();
    Polytope::hull(&pts).unwrap()
}

/// Random `m × n` matrix, rank `m` with probability one.
pub fn random_map(rng: &mut TestRng, m: usize, n: usize) -> LinearMap {
    LinearMap::new(DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(rng))).unwrap()
}

/// Random convex combination of the vertices.
pub fn random_body_point(rng: &mut TestRng, c: &Polytope) -> Point {
    let w: Vec<f64> = (0..c.num_vertices()).map(|_| rng.random::<f64>().powi(3)).collect();
    let total: f64 = w.iter().sum();
    let v = c.vertex_matrix() * DVector::from_vec(w) / total;
    Point::from(v)
}

/// Random rotation in `R^d`.
pub fn random_rotation(rng: &mut TestRng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Ellipsoid with eigenvalues of the shape matrix in `[lo, hi]`.
pub fn random_ellipsoid(rng: &mut TestRng, d: usize, lo: f64, hi: f64) -> Ellipsoid {
    let r = random_rotation(rng, d);
    let eig = DVector::from_fn(d, |_, _| rng.random_range(lo..hi));
    let q = &r * DMatrix::from_diagonal(&eig) * r.transpose();
    let q = (&q + q.transpose()) * 0.5;
    Ellipsoid::new(Point::from(gaussian(rng, d)), q).unwrap()
}

/// Nearest point of `conv(V) ∩ {Az = y}` to `a` by enumerating affinely
/// independent vertex subsets.
///
/// The optimum lies in the relative interior of a face `F` of the body and
/// is the nearest point of `aff(F) ∩ {Az = y}`; a triangulation of `F`
/// puts it inside a simplex spanning `aff(F)`, whose equality-constrained
/// least-squares solution then has nonnegative weights. Every candidate is
/// feasible, so the minimum over subsets is exact.
pub fn oracle_fiber_point(v: &DMatrix<f64>, a: &DMatrix<f64>, y: &DVector<f64>, anchor: &DVector<f64>) -> Option<DVector<f64>> {
    let (d, n) = v.shape();
    let m = a.nrows();
    let w = a * v;
    let mut best: Option<(f64, DVector<f64>)> = None;
    for size in 1..=(d + 1).min(n) {
        for subset in combinations(n, size) {
            let vs = DMatrix::from_fn(d, size, |i, j| v[(i, subset[j])]);
            let mut c = DMatrix::zeros(m + 1, size);
            for j in 0..size {
                c[(0, j)] = 1.0;
                for i in 0..m {
                    c[(i + 1, j)] = w[(i, subset[j])];
                }
            }
            let mut rhs = DVector::zeros(m + 1);
            rhs[0] = 1.0;
            rhs.rows_mut(1, m).copy_from(y);
            // zero-padded to square so that V^T carries the whole null space
            let padded = DMatrix::from_fn((m + 1).max(size), size, |i, j| if i <= m { c[(i, j)] } else { 0.0 });
            let svd = padded.svd(true, true);
            let smax = svd.singular_values.max();
            let rhs_p = DVector::from_fn((m + 1).max(size), |i, _| if i <= m { rhs[i] } else { 0.0 });
            let Ok(lp) = svd.solve(&rhs_p, 1e-12 * smax) else { continue };
            if (&c * &lp - &rhs).amax() > 1e-10 {
                continue;
            }
            let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
            let vt = svd.v_t.as_ref().unwrap();
            debug_assert_eq!(vt.nrows(), size);
            let null = vt.rows(rank, size - rank).transpose();
            let lam = if null.ncols() == 0 {
                lp
            } else {
                let m_ = &vs * &null;
                let r = anchor - &vs * &lp;
                let Ok(u) = m_.svd(true, true).solve(&r, 1e-13) else { continue };
                &lp + &null * u
            };
            if lam.min() < -1e-12 {
                continue;
            }
            let z = &vs * &lam;
            let dist = (&z - anchor).norm();
            if best.as_ref().is_none_or(|(b, _)| dist < *b) {
                best = Some((dist, z));
            }
        }
    }
    best.map(|(_, z)| z)
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn body(c: &Polytope) -> ConvexBody {
    ConvexBody::from(c.clone())
}

/// One result line, written past the test harness's output capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let line = format!("ACCEPTANCE {criterion}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}
