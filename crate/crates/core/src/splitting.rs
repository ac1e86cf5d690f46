//! Splits `L(a, b) = c` through the fiber selection, for single points and
//! for maps sampled on a finite complex (path or grid), plus continuity
//! audits of the resulting selections.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fibers::{fiber_point, FiberSpec, SelectionRule};
use crate::geometry::{ConvexBody, Point};
use crate::linmaps::ProductMap;

/// A pair `(a, b)` with `L(a, b) = target` up to `residual`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitResult {
    pub a: Point,
    pub b: Point,
    /// `‖L(a, b) − target‖∞`.
    pub residual: f64,
    /// `max(dist(a, A), dist(b, B))`.
    pub body_violation: f64,
}

impl SplitResult {
    /// `(a, b)` as one point of the product space.
    pub fn joint(&self) -> Point {
        self.a.concat(&self.b)
    }
}

fn check_factors(a: &ConvexBody, b: &ConvexBody, l: &ProductMap) -> Result<()> {
    let (n1, n2) = l.factor_dims();
    Error::check_dim(n1, a.dim())?;
    Error::check_dim(n2, b.dim())
}

fn split_with(spec: &FiberSpec, a_dim: usize, rule: &SelectionRule, tol: f64) -> Result<SplitResult> {
    let s = fiber_point(spec, rule, tol)?.found()?;
    let parts = spec.body.split_point(&s.point);
    let body_violation = spec.body.max_block_distance(&s.point)?;
    debug_assert_eq!(parts[0].dim(), a_dim);
    let mut parts = parts.into_iter();
    Ok(SplitResult {
        a: parts.next().expect("two blocks"),
        b: parts.next().expect("two blocks"),
        residual: s.residual,
        body_violation,
    })
}

/// The min-norm-to-anchor split of `c ∈ L(A, B)`.
///
/// A target outside `L(A, B)` yields [`Error::EmptyFiber`].
pub fn split(
    a: &ConvexBody,
    b: &ConvexBody,
    l: &ProductMap,
    c: &Point,
    rule: &SelectionRule,
    tol: f64,
) -> Result<SplitResult> {
    check_factors(a, b, l)?;
    let spec = FiberSpec::product(a.clone(), b.clone(), l, c.clone())?;
    split_with(&spec, a.dim(), rule, tol)
}

/// A map from a finite sample complex into the range space.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMap {
    pub ids: Vec<String>,
    pub values: Vec<Point>,
    /// Undirected adjacency, as index pairs into `ids`.
    pub edges: Vec<(usize, usize)>,
}

impl SampledMap {
    pub fn new(ids: Vec<String>, values: Vec<Point>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("sampled map has no samples"));
        }
        if ids.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} ids for {} values",
                ids.len(),
                values.len()
            )));
        }
        let d = values[0].dim();
        for v in &values {
            Error::check_dim(d, v.dim())?;
        }
        let n = values.len();
        if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::InvalidInput(format!("edge ({i}, {j}) out of range")));
        }
        let mut seen = HashMap::new();
        for (k, id) in ids.iter().enumerate() {
            if seen.insert(id.as_str(), k).is_some() {
                return Err(Error::InvalidInput(format!("duplicate sample id {id:?}")));
            }
        }
        Ok(SampledMap { ids, values, edges })
    }

    /// Samples along a path, ids `0, 1, …`; `closed` adds the edge from the
    /// last sample back to the first.
    pub fn path(values: Vec<Point>, closed: bool) -> Result<Self> {
        let n = values.len();
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if closed && n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new((0..n).map(|i| i.to_string()).collect(), values, edges)
    }

    /// A rectangular grid of `rows × cols` values in row-major order with
    /// 4-neighbour adjacency; ids are `"r:c"`.
    pub fn grid(rows: usize, cols: usize, values: Vec<Point>) -> Result<Self> {
        if rows * cols != values.len() {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let k = r * cols + c;
                if c + 1 < cols {
                    edges.push((k, k + 1));
                }
                if r + 1 < rows {
                    edges.push((k, k + cols));
                }
            }
        }
        let ids = (0..rows).flat_map(|r| (0..cols).map(move |c| format!("{r}:{c}"))).collect();
        Self::new(ids, values, edges)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitOptions {
    pub tol: f64,
    /// Use the previous sample's split as the anchor of the next one,
    /// walking the samples in order. This changes the selection rule and is
    /// off by default.
    pub tracking: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            tol: crate::default_tolerance(),
            tracking: false,
        }
    }
}

/// Splits every sample of `f`. Samples are independent and solved in
/// parallel unless tracking is on. The first failing sample aborts with its
/// id.
pub fn split_sampled_map(
    a: &ConvexBody,
    b: &ConvexBody,
    l: &ProductMap,
    f: &SampledMap,
    rule: &SelectionRule,
    opts: SplitOptions,
) -> Result<Vec<SplitResult>> {
    check_factors(a, b, l)?;
    Error::check_dim(l.left().nrows(), f.values[0].dim())?;
    let base = FiberSpec::product(a.clone(), b.clone(), l, f.values[0].clone())?;
    let one = |k: usize, rule: &SelectionRule| -> Result<SplitResult> {
        let spec = base.with_target(f.values[k].clone())?;
        split_with(&spec, a.dim(), rule, opts.tol).map_err(|e| Error::Sample {
            id: f.ids[k].clone(),
            source: Box::new(e),
        })
    };
    if opts.tracking {
        let mut out: Vec<SplitResult> = Vec::with_capacity(f.len());
        let mut anchor = rule.clone();
        for k in 0..f.len() {
            let s = one(k, &anchor)?;
            anchor = SelectionRule::min_norm_to(s.joint());
            out.push(s);
        }
        Ok(out)
    } else {
        (0..f.len()).into_par_iter().map(|k| one(k, rule)).collect()
    }
}

/// Per-edge jumps of a selection over a sample complex.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub edges: Vec<(usize, usize)>,
    /// `‖s_i − s_j‖` per edge.
    pub jumps: Vec<f64>,
    pub max_jump: f64,
    /// Kernel component `‖Π_Ker (s_i − s_j)‖` per edge: the part of the
    /// jump not forced by the change of target. Empty when no kernel was
    /// supplied.
    pub fiber_jumps: Vec<f64>,
    pub max_fiber_jump: f64,
    /// `max_jump` at this resolution over `max_jump` at a coarser one.
    pub refinement_ratio: Option<f64>,
}

impl ContinuityReport {
    /// `kernel` is an orthonormal basis (columns) of the kernel of the map.
    pub fn from_points(
        points: &[Point],
        edges: &[(usize, usize)],
        kernel: Option<&DMatrix<f64>>,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("continuity report needs at least two samples".into()));
        }
        let n = points.len();
        let mut jumps = Vec::with_capacity(edges.len());
        let mut fiber_jumps = Vec::new();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!("edge ({i}, {j}) out of range")));
            }
            Error::check_dim(points[i].dim(), points[j].dim())?;
            let diff = points[j].as_vector() - points[i].as_vector();
            jumps.push(diff.norm());
            if let Some(k) = kernel {
                Error::check_dim(k.nrows(), diff.len())?;
                fiber_jumps.push(k.tr_mul(&diff).norm());
            }
        }
        let max = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
        Ok(ContinuityReport {
            edges: edges.to_vec(),
            max_jump: max(&jumps),
            max_fiber_jump: max(&fiber_jumps),
            jumps,
            fiber_jumps,
            refinement_ratio: None,
        })
    }

    /// Index of the edge carrying the largest jump.
    pub fn argmax(&self) -> Option<usize> {
        self.jumps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    /// Records `self.max_jump / coarse.max_jump`.
    pub fn refined_from(mut self, coarse: &ContinuityReport) -> Self {
        self.refinement_ratio = Some(if coarse.max_jump > 0.0 {
            self.max_jump / coarse.max_jump
        } else if self.max_jump > 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
        self
    }
}

/// Continuity report of the joint selections `(a, b)` over `edges`, with
/// fiber jumps measured in the kernel of `l`.
pub fn continuity_report(
    splits: &[SplitResult],
    edges: &[(usize, usize)],
    l: &ProductMap,
) -> Result<ContinuityReport> {
    let pts: Vec<Point> = splits.iter().map(SplitResult::joint).collect();
    ContinuityReport::from_points(&pts, edges, Some(l.as_linear_map().kernel_basis()))
}
