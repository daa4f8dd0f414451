//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EastError {
    #[error("site count must be at least 1, got {0}")]
    InvalidSiteCount(i64),

    #[error("control parameter s must be finite, got {0}")]
    NonFiniteS(f64),

    #[error("state is tagged {found:?}, operation requires {expected:?} basis")]
    BasisMismatch {
        expected: crate::state::BasisTag,
        found: crate::state::BasisTag,
    },

    #[error("state norm deviates from 1 by {0:.3e}")]
    NormViolation(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the dense ceiling {ceiling}")]
    DenseCeilingExceeded { dim: usize, ceiling: usize },

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NotConverged { residual: f64, iterations: usize },

    #[error("operation requires a complete eigendecomposition")]
    PartialDecomposition,

    #[error("site {site} out of range for L = {l}")]
    SiteOutOfRange { site: usize, l: usize },

    #[error("bipartition cut {cut} invalid for L = {l} (need 1 <= cut < L)")]
    InvalidCut { cut: usize, l: usize },

    #[error("need at least {needed} system sizes, got {got}")]
    TooFewSizes { needed: usize, got: usize },

    #[error("state is parallel to the component being projected out")]
    ParallelStates,

    #[error("energy window [{lo:.6}, {hi:.6}] does not cover requested range [{need_lo:.6}, {need_hi:.6}]")]
    WindowNotCovered {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("window holds {got} levels, need at least {needed}")]
    InsufficientLevels { needed: usize, got: usize },

    #[error("broadening eta must be positive, got {0}")]
    NonPositiveBroadening(f64),

    #[error("q = 1 has no direct fractal-dimension formula; use the q -> 1 limit routine")]
    QEqualsOne,

    #[error("time grid invalid: {0}")]
    InvalidTimeGrid(String),

    #[error("design matrix is singular or under-determined")]
    SingularDesign,

    #[error("fit requires strictly positive data for the log transform")]
    NonPositiveData,

    #[error("curve has no identifiable peak")]
    NoPeak,

    #[error("lapack routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("cache i/o: {0}")]
    CacheIo(#[from] std::io::Error),

    #[error("cache file malformed: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, EastError>;
