//! Fundamental-matrix estimators: linear 8-point and 7-point solvers, plus
//! the robust RANSAC and LMedS wrappers around them.

mod linear;
mod lmeds;
mod normalize;
mod poly;
mod ransac;

use std::time::Duration;

use thiserror::Error;

use crate::geometry::FundamentalMatrix;

pub use linear::{eight_point, seven_point, EpipolarLinearSystem};
pub use lmeds::lmeds;
pub use normalize::{hartley_normalize, NormalizationTransform};
pub use ransac::{ransac, required_iterations};

pub(crate) use ransac::ransac_instrumented;

/// Minimal sample size of the 8-point fit used inside RANSAC.
pub const SAMPLE_SIZE: usize = 8;

/// Relative singular-value cutoff below which a linear system is declared
/// rank-deficient.
pub(crate) const RANK_RATIO_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("need at least {need} pairs, got {got}")]
    TooFewPairs { got: usize, need: usize },
    #[error("expected exactly {need} pairs, got {got}")]
    WrongSampleSize { got: usize, need: usize },
    /// All points coincide; no similarity normalization exists.
    #[error("degenerate input: points do not span the plane")]
    DegenerateInput,
    /// The stacked constraint matrix is rank-deficient (points are not in
    /// general position).
    #[error("degenerate configuration: constraint matrix is rank-deficient")]
    DegenerateConfiguration,
    #[error("no sample reached a consensus of {SAMPLE_SIZE} inliers")]
    NoConsensus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// RANSAC parameters. The sample size is fixed at [`SAMPLE_SIZE`].
#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    /// Inlier threshold on the symmetric point-to-epipolar-line distance, pixels.
    pub th: f64,
    /// Confidence that at least one all-inlier sample is drawn, in (0, 1).
    pub confidence: f64,
    /// Hard cap on the number of sampling iterations.
    pub max_iterations: usize,
    /// RNG seed; equal seeds reproduce results bit for bit.
    pub seed: u64,
    /// Solve the linear fits in Hartley-normalized coordinates.
    pub normalize: bool,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            th: 1.0,
            confidence: 0.99,
            max_iterations: 1000,
            seed: 0,
            normalize: true,
        }
    }
}

impl RansacConfig {
    pub(crate) fn validate(&self) -> Result<(), EstimatorError> {
        if self.th.is_nan() || self.th <= 0.0 {
            return Err(EstimatorError::InvalidConfig(format!(
                "threshold must be positive, got {}",
                self.th
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.max_iterations == 0 {
            return Err(EstimatorError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a robust estimation run.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub f_matrix: FundamentalMatrix,
    /// Per-pair inlier flags, indexed like the input slice.
    pub inlier_mask: Vec<bool>,
    /// Sampling iterations actually executed (trials for LMedS).
    pub iterations_used: usize,
    /// Mean symmetric epipolar distance over the final inliers, pixels.
    pub mean_inlier_error: f64,
    /// Wall-clock duration of the whole run; excluded from determinism.
    pub elapsed: Duration,
}

impl EstimateResult {
    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&b| b).count()
    }
}
