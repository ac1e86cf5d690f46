//! Surjective linear maps given as dense matrices, their kernels, and the
//! two transversality conditions used by the splitting theory.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Point, Polytope};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Threshold on the smallest singular value of `[dir(F) | Ker L]` below
/// which a facet is declared to contain a kernel direction.
pub const TRANSVERSALITY_TOL: f64 = 1e-9;

/// Numerical rank: singular values above `RANK_TOL · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.singular_values();
    let top = s.max();
    if top <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > RANK_TOL * top).count()
}

/// A linear surjection `Rⁿ → Rᵐ`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    /// `n × (n - m)`, orthonormal columns.
    kernel: DMatrix<f64>,
    /// Cholesky factor of `A Aᵀ`, used for the pseudo-inverse `Aᵀ (A Aᵀ)⁻¹`.
    gram: Cholesky<f64, Dyn>,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (m, n) = matrix.shape();
        if m == 0 || n == 0 {
            return Err(Error::EmptyInput("linear map needs at least one row and column"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let rank = numerical_rank(&matrix);
        if rank < m {
            return Err(Error::NotSurjective { rank, rows: m });
        }
        // Pad to n × n so that the SVD yields a full set of right singular
        // vectors; the n - m smallest span the kernel.
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m, n)).copy_from(&matrix);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let mut kernel = DMatrix::zeros(n, n - m);
        for (k, &i) in order.iter().take(n - m).enumerate() {
            kernel.set_column(k, &v_t.row(i).transpose());
        }
        let gram = (&matrix * matrix.transpose())
            .cholesky()
            .ok_or(Error::NotSurjective { rank, rows: m })?;
        Ok(LinearMap { matrix, kernel, gram })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        for r in rows {
            Error::check_dim(n, r.len())?;
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    /// Orthogonal projection `Rⁿ → Rᵐ` onto the first `m` coordinates.
    pub fn coordinate_projection(n: usize, m: usize) -> Result<Self> {
        Self::new(DMatrix::identity(m, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Range dimension `m`.
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// Domain dimension `n`.
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Orthonormal kernel basis, one vector per column.
    pub fn kernel_basis(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        Error::check_dim(self.cols(), x.dim())?;
        Ok(Point::from(&self.matrix * x.as_vector()))
    }

    pub(crate) fn apply_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// Nearest point of the affine subspace `{z : A z = y}`.
    pub fn project_to_level(&self, z: &Point, y: &Point) -> Result<Point> {
        Error::check_dim(self.cols(), z.dim())?;
        Error::check_dim(self.rows(), y.dim())?;
        Ok(Point::from(self.level_projection(z.as_vector(), y.as_vector())))
    }

    pub(crate) fn level_projection(&self, z: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let r = &self.matrix * z - y;
        z - self.matrix.tr_mul(&self.gram.solve(&r))
    }

    /// `Aᵀ (A Aᵀ)⁻¹ y`, the minimum-norm preimage of `y`.
    pub fn pseudo_inverse_apply(&self, y: &Point) -> Result<Point> {
        Error::check_dim(self.rows(), y.dim())?;
        Ok(Point::from(self.matrix.tr_mul(&self.gram.solve(y.as_vector()))))
    }
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// `L(y₁, y₂) = left · y₁ + right · y₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMap {
    left: DMatrix<f64>,
    right: DMatrix<f64>,
    joint: LinearMap,
}

impl ProductMap {
    pub fn new(left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        Error::check_dim(left.nrows(), right.nrows())?;
        let m = left.nrows();
        let (n1, n2) = (left.ncols(), right.ncols());
        let mut joint = DMatrix::zeros(m, n1 + n2);
        joint.view_mut((0, 0), (m, n1)).copy_from(&left);
        joint.view_mut((0, n1), (m, n2)).copy_from(&right);
        let joint = LinearMap::new(joint)?;
        Ok(ProductMap { left, right, joint })
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// Domain dimensions `(n₁, n₂)`.
    pub fn factor_dims(&self) -> (usize, usize) {
        (self.left.ncols(), self.right.ncols())
    }

    /// The concatenated map `[left | right]`.
    pub fn as_linear_map(&self) -> &LinearMap {
        &self.joint
    }

    pub fn to_linear_map(&self) -> LinearMap {
        self.joint.clone()
    }

    pub fn apply(&self, y1: &Point, y2: &Point) -> Result<Point> {
        Error::check_dim(self.left.ncols(), y1.dim())?;
        Error::check_dim(self.right.ncols(), y2.dim())?;
        Ok(Point::from(&self.left * y1.as_vector() + &self.right * y2.as_vector()))
    }
}

/// The sum map `(y₁, y₂) ↦ y₁ + y₂` on `R^d × R^d`.
pub fn make_sum_map(d: usize) -> Result<ProductMap> {
    if d == 0 {
        return Err(Error::InvalidInput("sum map needs d >= 1".into()));
    }
    ProductMap::new(DMatrix::identity(d, d), DMatrix::identity(d, d))
}

/// `Ker L ∩ (Y₁ × {0}) = {0}` and `Ker L ∩ ({0} × Y₂) = {0}`, i.e. both
/// blocks are injective.
pub fn kernel_transversal_to_factors(l: &ProductMap) -> bool {
    let (n1, n2) = l.factor_dims();
    numerical_rank(&l.left) == n1 && numerical_rank(&l.right) == n2
}

/// Outcome of [`transversality_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum Transversality {
    Pass,
    Fail {
        /// Index into [`Polytope::facets`].
        facet: usize,
        /// Unit vector in both the facet's direction space and the kernel.
        direction: Point,
        /// The pair of facet vertices whose chord is best aligned with
        /// `direction` (longest among exact alignments).
        chord: Option<(Point, Point)>,
    },
}

impl Transversality {
    pub fn passed(&self) -> bool {
        matches!(self, Transversality::Pass)
    }
}

/// Does the relative boundary of `c` contain a segment parallel to
/// `Ker L`? Every boundary segment lies in a facet, so it suffices to test
/// whether some facet's direction space meets the kernel.
pub fn transversality_check(c: &Polytope, l: &LinearMap) -> Result<Transversality> {
    Error::check_dim(l.cols(), c.dim())?;
    let kernel = l.kernel_basis();
    if kernel.ncols() == 0 {
        return Ok(Transversality::Pass);
    }
    for (i, facet) in c.facets()?.iter().enumerate() {
        let dirs = &facet.directions;
        if dirs.ncols() == 0 {
            continue;
        }
        let (d, p, k) = (c.dim(), dirs.ncols(), kernel.ncols());
        let mut joint = DMatrix::zeros(d, p + k);
        joint.view_mut((0, 0), (d, p)).copy_from(dirs);
        joint.view_mut((0, p), (d, k)).copy_from(kernel);
        let svd = joint.clone().svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let top = svd.singular_values.max();
        let (j, smallest) = if p + k > d {
            // fewer singular values than columns: a null vector exists
            (usize::MAX, 0.0)
        } else {
            svd.singular_values
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty")
        };
        if smallest > TRANSVERSALITY_TOL * top {
            continue;
        }
        let coeffs = if j == usize::MAX {
            null_vector(&joint)
        } else {
            v_t.row(j).transpose()
        };
        let mut dir = dirs * coeffs.rows(0, p);
        let norm = dir.norm();
        if !(norm > 0.0) {
            continue;
        }
        dir /= norm;
        let chord = aligned_chord(c, &facet.vertices, &dir);
        return Ok(Transversality::Fail {
            facet: i,
            direction: Point::from(dir),
            chord,
        });
    }
    Ok(Transversality::Pass)
}

/// Strictly convex bodies pass vacuously; polytopes go through the facet
/// test.
pub fn transversality_check_body(c: &ConvexBody, l: &LinearMap) -> Result<Transversality> {
    match c {
        ConvexBody::Polytope(p) => transversality_check(p, l),
        ConvexBody::Ellipsoid(e) => {
            Error::check_dim(l.cols(), e.dim())?;
            Ok(Transversality::Pass)
        }
    }
}

fn null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.ncols();
    let mut padded = DMatrix::zeros(n, n);
    padded.view_mut((0, 0), m.shape()).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let j = svd.singular_values.imin();
    v_t.row(j).transpose()
}

fn aligned_chord(c: &Polytope, verts: &[usize], dir: &DVector<f64>) -> Option<(Point, Point)> {
    let vm = c.vertex_matrix();
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for (a, &i) in verts.iter().enumerate() {
        for &j in &verts[a + 1..] {
            let diff = vm.column(j) - vm.column(i);
            let len = diff.norm();
            if len == 0.0 {
                continue;
            }
            let align = diff.dot(dir).abs() / len;
            let better = match best {
                None => true,
                Some((ba, bl, _, _)) => {
                    align > ba + 1e-12 || ((align - ba).abs() <= 1e-12 && len > bl)
                }
            };
            if better {
                best = Some((align, len, i, j));
            }
        }
    }
    best.map(|(_, _, i, j)| {
        // orient along `dir`
        let (i, j) = if (vm.column(j) - vm.column(i)).dot(dir) >= 0.0 { (i, j) } else { (j, i) };
        (c.vertex(i), c.vertex(j))
    })
}
