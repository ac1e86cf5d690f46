use nalgebra::{DMatrix, DVector};

use super::{Point, ProjectionDetail, Tangent};
use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 200;

/// `{x : (x - c)ᵀ Q⁻¹ (x - c) ≤ 1}` for a symmetric positive-definite `Q`.
///
/// The eigendecomposition of `Q` is computed once at construction; the
/// semi-axes are the square roots of its eigenvalues.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    center: DVector<f64>,
    shape: DMatrix<f64>,
    axes: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl Ellipsoid {
    pub fn new(center: Point, shape: DMatrix<f64>) -> Result<Self> {
        let d = center.dim();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if shape.nrows() != d { shape.nrows() } else { shape.ncols() },
            });
        }
        if shape.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite shape entry".into()));
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "shape matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "shape matrix is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        Ok(Ellipsoid {
            center: center.into_vector(),
            shape: sym,
            axes: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
        })
    }

    /// Ball of radius `r` around `center`.
    pub fn ball(center: Point, r: f64) -> Result<Self> {
        let d = center.dim();
        Self::new(center, DMatrix::identity(d, d) * (r * r))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// `(x - c)ᵀ Q⁻¹ (x - c)`.
    pub fn gauge_sq(&self, x: &DVector<f64>) -> f64 {
        let u = self.axes.tr_mul(&(x - &self.center));
        u.iter()
            .zip(self.eigenvalues.iter())
            .map(|(ui, qi)| ui * ui / qi)
            .sum()
    }

    /// Largest semi-axis.
    pub fn radius(&self) -> f64 {
        self.eigenvalues.max().sqrt()
    }

    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        self.project_detail(x).point
    }

    /// Nearest point, by Newton's method on the KKT multiplier `λ`:
    /// in eigen-coordinates `zᵢ = qᵢ uᵢ / (qᵢ + λ)` with
    /// `Σ qᵢ uᵢ² / (qᵢ + λ)² = 1`. The secular function is convex and
    /// decreasing, so Newton from `λ = 0` increases monotonically to the
    /// root.
    pub(crate) fn project_detail(&self, x: &DVector<f64>) -> ProjectionDetail {
        let u = self.axes.tr_mul(&(x - &self.center));
        let q = &self.eigenvalues;
        let g: f64 = u.iter().zip(q.iter()).map(|(ui, qi)| ui * ui / qi).sum();
        if g <= 1.0 {
            return ProjectionDetail {
                point: x.clone(),
                tangent: Tangent::Identity,
                support: Vec::new(),
            };
        }
        let secular = |lam: f64| -> (f64, f64) {
            let mut f = -1.0;
            let mut df = 0.0;
            for (ui, qi) in u.iter().zip(q.iter()) {
                let den = qi + lam;
                let t = qi * ui * ui / (den * den);
                f += t;
                df -= 2.0 * t / den;
            }
            (f, df)
        };
        let mut lam = 0.0_f64;
        for _ in 0..NEWTON_MAX_ITER {
            let (f, df) = secular(lam);
            if f.abs() <= NEWTON_TOL {
                break;
            }
            let step = -f / df;
            lam += step;
            if step.abs() <= NEWTON_TOL * (1.0 + lam) {
                break;
            }
        }
        let z_eig = DVector::from_fn(u.len(), |i, _| q[i] * u[i] / (q[i] + lam));
        let point = &self.center + &self.axes * &z_eig;

        // dz = (D - g gᵀ / s) du in eigen-coordinates.
        let gvec = DVector::from_fn(u.len(), |i, _| {
            let den = q[i] + lam;
            q[i] * u[i] / (den * den)
        });
        let s: f64 = (0..u.len())
            .map(|i| {
                let den = q[i] + lam;
                q[i] * u[i] * u[i] / (den * den * den)
            })
            .sum();
        let mut j = DMatrix::from_diagonal(&DVector::from_fn(u.len(), |i, _| q[i] / (q[i] + lam)));
        if s > 0.0 {
            j -= &gvec * gvec.transpose() / s;
        }
        let jac = &self.axes * j * self.axes.transpose();
        ProjectionDetail {
            point,
            tangent: Tangent::Linear(jac),
            support: Vec::new(),
        }
    }

    /// `(⟨d, c⟩ + √(dᵀQd), c + Qd/√(dᵀQd))`.
    pub fn support(&self, direction: &DVector<f64>) -> (f64, DVector<f64>) {
        let qd = &self.shape * direction;
        let r = direction.dot(&qd).max(0.0).sqrt();
        let value = direction.dot(&self.center) + r;
        let arg = if r > 0.0 { &self.center + qd / r } else { self.center.clone() };
        (value, arg)
    }

    pub fn translate(&self, v: &DVector<f64>) -> Ellipsoid {
        Ellipsoid {
            center: &self.center + v,
            shape: self.shape.clone(),
            axes: self.axes.clone(),
            eigenvalues: self.eigenvalues.clone(),
        }
    }
}

impl PartialEq for Ellipsoid {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.shape == other.shape
    }
}
