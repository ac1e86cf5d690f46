use nalgebra::DVector;

use super::{ConvexBody, Point, ProjectionDetail};
use crate::error::{Error, Result};

/// Cartesian product `B₁ × … × B_k` acting on concatenated coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBody {
    blocks: Vec<ConvexBody>,
    offsets: Vec<usize>,
    dim: usize,
}

impl ProductBody {
    pub fn new(blocks: Vec<ConvexBody>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyInput("product body needs at least one block"));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for b in &blocks {
            offsets.push(dim);
            dim += b.dim();
        }
        Ok(ProductBody { blocks, offsets, dim })
    }

    pub fn pair(a: ConvexBody, b: ConvexBody) -> Self {
        Self::new(vec![a, b]).expect("two blocks")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[ConvexBody] {
        &self.blocks
    }

    /// `(offset, len)` of each block in the concatenated coordinates.
    pub fn block_ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets.iter().zip(&self.blocks).map(|(&o, b)| (o, b.dim()))
    }

    pub fn split_point(&self, x: &Point) -> Vec<Point> {
        self.block_ranges().map(|(o, n)| x.slice(o, n)).collect()
    }

    pub(crate) fn project_blocks(
        &self,
        x: &DVector<f64>,
        warm: Option<&[Vec<usize>]>,
    ) -> Vec<ProjectionDetail> {
        self.blocks
            .iter()
            .zip(self.block_ranges())
            .enumerate()
            .map(|(k, (b, (o, n)))| {
                let hint = warm.and_then(|w| w.get(k)).map(|v| v.as_slice());
                b.project_detail(&x.rows(o, n).into_owned(), hint)
            })
            .collect()
    }

    pub(crate) fn project_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for (b, (o, n)) in self.blocks.iter().zip(self.block_ranges()) {
            out.rows_mut(o, n)
                .copy_from(&b.project_vec(&x.rows(o, n).into_owned()));
        }
        out
    }

    /// Blockwise support: `h(d) = Σ h_{Bᵢ}(dᵢ)`.
    pub(crate) fn support_vec(&self, d: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut arg = DVector::zeros(self.dim);
        let mut value = 0.0;
        for (b, (o, n)) in self.blocks.iter().zip(self.block_ranges()) {
            let (v, a) = b.support_vec(&d.rows(o, n).into_owned());
            value += v;
            arg.rows_mut(o, n).copy_from(&a);
        }
        (value, arg)
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        Error::check_dim(self.dim, x.dim())?;
        Ok((self.project_vec(x) - x.as_vector()).norm())
    }

    /// Largest per-block distance.
    pub fn max_block_distance(&self, x: &Point) -> Result<f64> {
        Error::check_dim(self.dim, x.dim())?;
        Ok(self
            .blocks
            .iter()
            .zip(self.split_point(x))
            .map(|(b, xi)| b.distance(&xi).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max))
    }

    pub fn center(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for (b, (o, n)) in self.blocks.iter().zip(self.block_ranges()) {
            c.rows_mut(o, n).copy_from(&b.center());
        }
        c
    }

    /// Radius of a ball around [`ProductBody::center`] containing the body.
    pub fn radius(&self) -> f64 {
        self.blocks.iter().map(|b| b.radius().powi(2)).sum::<f64>().sqrt()
    }
}

impl From<ConvexBody> for ProductBody {
    fn from(b: ConvexBody) -> Self {
        ProductBody::new(vec![b]).expect("one block")
    }
}
