//! Continuous splitting of points of Minkowski sums and, more generally, of
//! linear images `L(A, B)` of products of convex bodies.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: V-polytopes and ellipsoids with projection, support,
//!   membership, Minkowski sums, strict convexity and relative interiors.
//! - [`linmaps`]: surjective linear maps, their kernels, and the two
//!   transversality conditions (boundary segments vs. kernel, kernel vs.
//!   factors).
//! - [`fibers`]: the fiber problem `C ∩ L⁻¹(y)` and the min-norm-to-anchor
//!   selection rule.
//! - [`splitting`]: splits `L(a, b) = c` for single points and sampled maps,
//!   plus continuity audits along sample complexes.
//! - [`gallery`]: the spiral body, its flat variant and Schauder-type bodies, and the
//!   diagnostic experiments built on them.
//! - [`io`]: JSON body/map formats and CSV report schemas.

pub mod error;
pub mod fibers;
pub mod gallery;
pub mod geometry;
pub mod io;
pub mod linmaps;
pub mod splitting;

pub use error::{Error, Result};

pub use geometry::{ConvexBody, Ellipsoid, Point, Polytope, ProductBody};
pub use fibers::{dist_to_fiber, fiber_diameter, fiber_point, FiberPoint, FiberSolution, FiberSpec, SelectionRule};
pub use linmaps::{LinearMap, ProductMap, Transversality};
pub use splitting::{split, split_sampled_map, ContinuityReport, SampledMap, SplitOptions, SplitResult};

/// Default feasibility tolerance (membership, map residuals).
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default optimality tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-10;

/// Environment variable overriding [`DEFAULT_TOL`].
pub const TOL_ENV: &str = "MINKSPLIT_TOL";

/// Feasibility tolerance, honouring `MINKSPLIT_TOL` when it parses to a
/// positive finite number.
pub fn default_tolerance() -> f64 {
    std::env::var(TOL_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_TOL)
}
