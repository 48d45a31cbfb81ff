//! The complete clustering-assisted estimation flow: embed the matches in
//! 4-D, keep the density-peak points, then run RANSAC restricted to them.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::density_peaks::{
    build_match_vectors, density_peaks, pairwise_distances, select_dc, select_inliers,
    ClusterError, ClusterSelection, DensityPeaksResult,
};
use crate::estimators::{
    ransac_instrumented, EstimateResult, EstimatorError, RansacConfig, SAMPLE_SIZE,
};
use crate::geometry::MatchPair;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("need at least {need} pairs, got {got}")]
    TooFewPairs { got: usize, need: usize },
    #[error("cluster selection kept only {selected} pairs (< {SAMPLE_SIZE}) at alpha = {alpha}")]
    TooFewClusterInliers { selected: usize, alpha: f64 },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Parameters of the full pipeline. `alpha` scales the gamma threshold
/// (0 keeps every pair and reduces the pipeline to plain RANSAC);
/// `dc_fraction` is the neighborhood target for the cutoff distance. The
/// normalization flag for the inner linear fits lives in [`RansacConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub dc_fraction: f64,
    pub ransac: RansacConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.011,
            dc_fraction: 0.02,
            ransac: RansacConfig::default(),
        }
    }
}

impl PipelineConfig {
    fn validate(&self) -> Result<(), PipelineError> {
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(PipelineError::Estimator(EstimatorError::InvalidConfig(
                format!("alpha must be non-negative, got {}", self.alpha),
            )));
        }
        Ok(())
    }
}

/// Wall-clock cost of each stage; excluded from determinism guarantees.
#[derive(Debug, Clone, Copy)]
pub struct StageTimings {
    pub clustering: Duration,
    pub ransac_search: Duration,
    pub refit: Duration,
}

/// Everything the pipeline produces. The estimate's inlier mask is indexed
/// over the original pair list; pairs rejected by the cluster selection are
/// always `false` there.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub estimate: EstimateResult,
    pub cluster_selection: ClusterSelection,
    pub density: DensityPeaksResult,
    pub stage_timings: StageTimings,
}

fn cluster_stage(
    pairs: &[MatchPair],
    config: &PipelineConfig,
) -> Result<(DensityPeaksResult, ClusterSelection), PipelineError> {
    let vectors = build_match_vectors(pairs);
    let distances = pairwise_distances(&vectors)?;
    let d_c = select_dc(&distances, config.dc_fraction)?;
    let density = density_peaks(&distances, d_c);
    let selection = select_inliers(&density, config.alpha);
    Ok((density, selection))
}

/// Steps 1-5 of the method: build 4-D vectors, compute densities and
/// separations, keep the gamma-threshold selection, then estimate with
/// RANSAC restricted to the selected pairs. Deterministic for a fixed seed.
pub fn clustering_assisted_estimate(
    pairs: &[MatchPair],
    config: &PipelineConfig,
) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    if pairs.len() < SAMPLE_SIZE {
        return Err(PipelineError::TooFewPairs {
            got: pairs.len(),
            need: SAMPLE_SIZE,
        });
    }
    let cluster_start = Instant::now();
    let (density, selection) = cluster_stage(pairs, config)?;
    let clustering = cluster_start.elapsed();

    if selection.inlier_indices.len() < SAMPLE_SIZE {
        return Err(PipelineError::TooFewClusterInliers {
            selected: selection.inlier_indices.len(),
            alpha: config.alpha,
        });
    }
    let subset: Vec<MatchPair> = selection.inlier_indices.iter().map(|&i| pairs[i]).collect();
    let (sub_estimate, timings) = ransac_instrumented(&subset, &config.ransac)?;

    let mut inlier_mask = vec![false; pairs.len()];
    for (&orig, &flag) in selection
        .inlier_indices
        .iter()
        .zip(&sub_estimate.inlier_mask)
    {
        inlier_mask[orig] = flag;
    }
    let estimate = EstimateResult {
        f_matrix: sub_estimate.f_matrix,
        inlier_mask,
        iterations_used: sub_estimate.iterations_used,
        mean_inlier_error: sub_estimate.mean_inlier_error,
        elapsed: sub_estimate.elapsed,
    };
    Ok(PipelineReport {
        estimate,
        cluster_selection: selection,
        density,
        stage_timings: StageTimings {
            clustering,
            ransac_search: timings.search,
            refit: timings.refit,
        },
    })
}

/// One row of the decision-figure export.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub index: usize,
    pub rho: usize,
    pub delta: f64,
    pub gamma: f64,
    pub inlier: bool,
    pub nearest_higher: Option<usize>,
}

/// Data behind the decision figure: one record per point plus the constant
/// of the threshold curve `rho * delta = alpha * rho_max * delta_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionFigure {
    pub records: Vec<DecisionRecord>,
    pub d_c: f64,
    pub alpha: f64,
    pub curve_constant: f64,
}

/// Compute the decision-figure records for a set of pairs (estimation not
/// required; two pairs suffice).
pub fn decision_figure(
    pairs: &[MatchPair],
    config: &PipelineConfig,
) -> Result<DecisionFigure, PipelineError> {
    config.validate()?;
    let (density, selection) = cluster_stage(pairs, config)?;
    let inlier_flags = {
        let mut flags = vec![false; pairs.len()];
        for &i in &selection.inlier_indices {
            flags[i] = true;
        }
        flags
    };
    let records = (0..pairs.len())
        .map(|i| DecisionRecord {
            index: i,
            rho: density.rho[i],
            delta: density.delta[i],
            gamma: density.gamma[i],
            inlier: inlier_flags[i],
            nearest_higher: density.nearest_higher[i],
        })
        .collect();
    Ok(DecisionFigure {
        records,
        d_c: density.d_c,
        alpha: config.alpha,
        curve_constant: selection.threshold_value,
    })
}
