//! Two-view epipolar geometry toolkit.
//!
//! Estimates the fundamental matrix from point correspondences with a
//! density-peaks clustering prefilter followed by RANSAC, alongside the
//! classical baselines (8-point, 7-point, LMedS, plain RANSAC), and
//! benchmarks everything on synthetic scenes with known ground truth.

pub mod density_peaks;
pub mod estimators;
pub mod evaluation;
pub mod geometry;
pub mod pipeline;
pub mod synthetic;

pub use geometry::{
    epipolar_line, epipolar_residual, point_line_distance, symmetric_epipolar_distance,
    FundamentalMatrix, GeometryError, HomogeneousPoint2, Line2, MatchPair, Side,
};

pub use estimators::{
    eight_point, hartley_normalize, lmeds, ransac, required_iterations, seven_point,
    EstimateResult, EstimatorError, RansacConfig,
};

pub use density_peaks::{
    build_match_vectors, delta_and_parents, density_peaks, local_density, pairwise_distances,
    select_dc, select_inliers, ClusterError, ClusterSelection, DensityPeaksResult, DistanceMatrix,
    MatchVector4,
};

pub use pipeline::{
    clustering_assisted_estimate, decision_figure, DecisionFigure, DecisionRecord, PipelineConfig,
    PipelineError, PipelineReport, StageTimings,
};

pub use synthetic::{
    f_from_cameras, generate_scene, CameraModel, SceneError, SyntheticScene, SyntheticSceneConfig,
};

pub use evaluation::{
    benchmark, zhang_error, BenchmarkParams, BenchmarkRow, EvaluationConfig, EvaluationError,
    EvaluationReport, Method,
};
