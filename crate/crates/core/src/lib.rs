//! Recovery of full affine correspondences from orientation- and
//! scale-invariant feature matches under known epipolar geometry, and their
//! use for single-correspondence homography estimation in LO-RANSAC.

pub mod affine;
pub mod epipolar;
pub mod error;
pub mod eval;
pub mod homography;
pub mod matchfile;
pub mod numerics;
pub mod recovery;
pub mod robust;
pub mod synthbench;

pub use affine::{
    compose_affine, decompose_affine, simulate_sift_from_affine, AffineComponents, AffineCorrespondence,
    Decomposition, SiftCorrespondence, SiftFeature,
};
pub use epipolar::{Epipole, FundamentalMatrix, PointPair};
pub use error::{Error, Result};
pub use homography::{haf_from_ac, h_3pt, h_4pt, reprojection_error, Homography};
pub use recovery::{filter_candidates, recover_affine, Degeneracy, RecoveryResult};

pub use robust::{lo_ransac_fundamental, lo_ransac_homography, RansacConfig, RansacResult, SolverCombo};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
