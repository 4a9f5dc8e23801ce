use thiserror::Error;

/// Errors produced by the estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank-deficient system: estimated rank {rank} of {cols}")]
    RankDeficient { rank: usize, cols: usize },
    #[error("matrix is numerically full rank (smallest singular value {smallest_singular_value:e})")]
    FullRank { smallest_singular_value: f64 },
    #[error("all points coincide")]
    CoincidentPoints,
    #[error("need at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("point maps to infinity (projective depth {0:e})")]
    PointAtInfinity(f64),
    #[error("epipole of the second image is at infinity")]
    EpipoleAtInfinity,
    #[error("affine transformation is singular")]
    SingularAffine,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
