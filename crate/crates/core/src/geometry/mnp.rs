//! Wolfe's minimum-norm-point algorithm, used for Euclidean projection onto
//! the convex hull of a finite point set.
//!
//! Projecting `x` onto `conv{v_j}` is the min-norm-point problem for the
//! translated set `p_j = v_j - x`. The iteration keeps a "corral": an
//! affinely independent subset `S` whose affine minimizer lies in the
//! relative interior of `conv S`. Each major step adds the vertex most
//! improving along `-x`; minor steps shrink `S` until the affine minimizer
//! is a proper convex combination again.

use nalgebra::{DMatrix, DVector};

/// Termination data of one projection.
#[derive(Clone, Debug)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct MinNormPoint {
    /// Nearest point of the hull, in the original coordinates.
    pub point: DVector<f64>,
    /// Indices of the final corral (affinely independent).
    pub support: Vec<usize>,
    /// Convex weights on `support`.
    pub weights: Vec<f64>,
    pub iterations: usize,
}

const WEIGHT_EPS: f64 = 1e-14;

/// The current corral, kept in original coordinates so that far-away query
/// points do not degrade the linear algebra.
struct Corral {
    idx: Vec<usize>,
    w: Vec<f64>,
    verts: Vec<DVector<f64>>,
}

impl Corral {
    fn new() -> Self {
        Corral {
            idx: Vec::new(),
            w: Vec::new(),
            verts: Vec::new(),
        }
    }

    fn push(&mut self, j: usize, v: DVector<f64>, w: f64) {
        self.idx.push(j);
        self.verts.push(v);
        self.w.push(w);
    }

    fn retain(&mut self, keep: &[bool]) {
        let mut k = 0;
        self.idx.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        k = 0;
        self.verts.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        k = 0;
        self.w.retain(|_| {
            k += 1;
            keep[k - 1]
        });
    }

    /// Weights of the point of `aff S` nearest to `x`: with `D = [vᵢ − v₀]`
    /// solve `min ‖v₀ − x + D λ‖` by QR. `None` when `D` is numerically
    /// rank deficient.
    fn affine_minimizer(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        let k = self.idx.len();
        if k == 1 {
            return Some(vec![1.0]);
        }
        let dim = x.len();
        if k - 1 > dim {
            return None;
        }
        let v0 = &self.verts[0];
        let d = DMatrix::from_fn(dim, k - 1, |i, j| self.verts[j + 1][i] - v0[i]);
        let col_max = d.column_iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
        let qr = d.qr();
        let r = qr.r();
        if (0..k - 1).any(|i| !(r[(i, i)].abs() > 1e-12 * col_max)) {
            return None;
        }
        let rhs = -qr.q().tr_mul(&(v0 - x));
        let lam = r.solve_upper_triangular(&rhs)?;
        let mut w = Vec::with_capacity(k);
        w.push(1.0 - lam.sum());
        w.extend(lam.iter());
        w.iter().all(|v| v.is_finite()).then_some(w)
    }

    fn combination(&self, w: &[f64]) -> DVector<f64> {
        let mut p = DVector::zeros(self.verts[0].len());
        for (v, wi) in self.verts.iter().zip(w) {
            p.axpy(*wi, v, 1.0);
        }
        p
    }
}

/// Projects `x` onto the hull of the columns of `vertices`.
///
/// `warm` is an optional guess of the optimal corral (for instance the
/// support of a nearby previous projection); it is used only if its affine
/// minimizer is a proper convex combination.
///
/// Stops when the Wolfe gap `‖p − x‖² − min_j ⟨p − x, v_j − x⟩` falls below
/// `rel_gap_tol · s · (‖p − x‖ + s)`, with `s` the vertex spread.
pub(crate) fn project_onto_hull(
    vertices: &DMatrix<f64>,
    x: &DVector<f64>,
    warm: Option<&[usize]>,
    rel_gap_tol: f64,
    max_iter: usize,
) -> MinNormPoint {
    let n = vertices.ncols();
    let col = |j: usize| -> DVector<f64> { vertices.column(j).into_owned() };
    let v0 = vertices.column(0);
    let spread = (0..n)
        .map(|j| (vertices.column(j) - v0).norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut corral = Corral::new();
    let warmed = warm.and_then(|ws| {
        let mut c = Corral::new();
        for &j in ws.iter().filter(|&&j| j < n) {
            if !c.idx.contains(&j) {
                c.push(j, col(j), 0.0);
            }
        }
        if c.idx.is_empty() {
            return None;
        }
        let a = c.affine_minimizer(x)?;
        if a.iter().all(|&v| v > WEIGHT_EPS) {
            c.w = a;
            Some(c)
        } else {
            None
        }
    });
    match warmed {
        Some(c) => corral = c,
        None => {
            let j0 = (0..n)
                .min_by(|&a, &b| {
                    (vertices.column(a) - x)
                        .norm_squared()
                        .total_cmp(&(vertices.column(b) - x).norm_squared())
                })
                .expect("nonempty vertex set");
            corral.push(j0, col(j0), 1.0);
        }
    }
    let mut point = corral.combination(&corral.w);

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let cur = &point - x;
        // ⟨cur, v_j - x⟩ = ⟨cur, v_j⟩ - ⟨cur, x⟩
        let vx = vertices.tr_mul(&cur);
        let shift = cur.dot(x);
        let (j, best) = vx
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v - shift))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty vertex set");
        let norm_sq = cur.norm_squared();
        let gap = norm_sq - best;
        if gap <= rel_gap_tol * spread * (norm_sq.sqrt() + spread) || corral.idx.contains(&j) {
            break;
        }
        let before = (corral.idx.clone(), corral.w.clone(), corral.verts.clone());
        corral.push(j, col(j), 0.0);

        // Minor cycle.
        let mut dependent = false;
        loop {
            let Some(alpha) = corral.affine_minimizer(x) else {
                dependent = true;
                break;
            };
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                corral.w = alpha;
                break;
            }
            let (arg, theta) = alpha
                .iter()
                .zip(&corral.w)
                .enumerate()
                .filter(|(_, (&a, _))| a <= WEIGHT_EPS)
                .map(|(i, (&a, &w))| (i, if w - a > 0.0 { (w / (w - a)).min(1.0) } else { 0.0 }))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("some weight is non-positive");
            let w: Vec<f64> = corral
                .w
                .iter()
                .zip(&alpha)
                .map(|(&w, &a)| (1.0 - theta) * w + theta * a)
                .collect();
            let keep: Vec<bool> = w
                .iter()
                .enumerate()
                .map(|(i, &v)| i != arg && v > WEIGHT_EPS)
                .collect();
            corral.w = w;
            corral.retain(&keep);
            let s: f64 = corral.w.iter().sum();
            corral.w.iter_mut().for_each(|v| *v /= s);
            if corral.idx.len() == 1 {
                corral.w[0] = 1.0;
                break;
            }
        }
        if dependent {
            // The new vertex is numerically in the affine hull of the corral;
            // no further progress is possible at this precision.
            (corral.idx, corral.w, corral.verts) = before;
            break;
        }
        let next = corral.combination(&corral.w);
        let stalled = (&next - x).norm_squared() >= norm_sq;
        point = next;
        if stalled {
            // rounding-level stall
            break;
        }
    }

    MinNormPoint {
        point,
        support: corral.idx,
        weights: corral.w,
        iterations,
    }
}
