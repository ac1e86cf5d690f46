use thiserror::Error;

/// Errors raised by body construction, map construction and the fiber solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("map is not surjective: rank {rank} < {rows} rows")]
    NotSurjective { rank: usize, rows: usize },

    #[error("facet enumeration needs affine dimension <= {cap}, body has {dim}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("zero direction")]
    ZeroDirection,

    #[error("empty fiber: target is at distance {distance:e} from the image of the body")]
    EmptyFiber { distance: f64 },

    #[error("solver did not converge after {iterations} iterations (map residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("sample {id}: {source}")]
    Sample {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), Error> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }

    /// The innermost error, looking through per-sample wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Sample { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
