//! Ground-truth comparison of fundamental matrices (Zhang's resampling
//! metric) and the benchmark runner that times and scores every estimator
//! on one dataset.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::estimators::{eight_point, lmeds, ransac, seven_point, RansacConfig};
use crate::geometry::{
    point_line_distance, symmetric_epipolar_distance, FundamentalMatrix, HomogeneousPoint2, Line2,
    MatchPair,
};
use crate::pipeline::{clustering_assisted_estimate, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error(
        "exhausted {0} consecutive resampling attempts; epipolar geometry never meets the image"
    )]
    RetriesExhausted(usize),
    #[error("invalid evaluation configuration: {0}")]
    InvalidConfig(String),
}

/// Configuration of the ground-truth error metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    /// Number of resampled point pairs.
    pub trials: usize,
    /// Image rectangle the sampled points and lines must meet, pixels.
    pub image_bounds: (f64, f64),
    pub seed: u64,
    /// Cap on consecutive rejections within one trial.
    pub max_retries: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            trials: 500,
            image_bounds: (640.0, 480.0),
            seed: 0,
            max_retries: 10_000,
        }
    }
}

/// Outcome of the ground-truth comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    /// Mean of all `d_i` and `d'_i` distances, pixels.
    pub d1: f64,
    /// Per-trial `(d_i, d'_i)`.
    pub per_trial: Vec<(f64, f64)>,
    /// Total rejected resampling attempts across the run.
    pub retries_used: usize,
}

/// Clip a line to the `[0, w] x [0, h]` rectangle. Returns the segment's
/// endpoints, or `None` when the line misses the rectangle (or only grazes
/// a corner).
fn clip_line_to_rect(line: &Line2, width: f64, height: f64) -> Option<((f64, f64), (f64, f64))> {
    let norm = line.a.hypot(line.b);
    if norm == 0.0 {
        return None;
    }
    // Point on the line closest to the origin, and the unit direction.
    let px = -line.a * line.c / (norm * norm);
    let py = -line.b * line.c / (norm * norm);
    let dx = line.b / norm;
    let dy = -line.a / norm;

    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (p, d, limit) in [(px, dx, width), (py, dy, height)] {
        if d.abs() < 1e-12 {
            if p < 0.0 || p > limit {
                return None;
            }
            continue;
        }
        let (lo, hi) = if d > 0.0 {
            ((0.0 - p) / d, (limit - p) / d)
        } else {
            ((limit - p) / d, (0.0 - p) / d)
        };
        t0 = t0.max(lo);
        t1 = t1.min(hi);
    }
    let span = t1 - t0;
    if span.is_nan() || span <= 1e-9 {
        return None;
    }
    Some(((px + t0 * dx, py + t0 * dy), (px + t1 * dx, py + t1 * dy)))
}

fn line_through(f: &FundamentalMatrix, p: &HomogeneousPoint2, transpose: bool) -> Line2 {
    let v = if transpose {
        f.as_matrix().transpose() * p.to_vector()
    } else {
        f.as_matrix() * p.to_vector()
    };
    Line2 {
        a: v.x,
        b: v.y,
        c: v.z,
    }
}

/// Zhang's ground-truth comparison: resample points consistent with the
/// true geometry `f0` and measure their distances to the estimated
/// geometry's epipolar lines. Deterministic per seed; trials use derived
/// per-trial streams so they could run concurrently.
pub fn zhang_error(
    f0: &FundamentalMatrix,
    f1: &FundamentalMatrix,
    config: &EvaluationConfig,
) -> Result<EvaluationReport, EvaluationError> {
    if config.trials == 0 {
        return Err(EvaluationError::InvalidConfig(
            "trials must be at least 1".into(),
        ));
    }
    let (width, height) = config.image_bounds;
    if !(width > 0.0 && height > 0.0) {
        return Err(EvaluationError::InvalidConfig(
            "image bounds must be positive".into(),
        ));
    }
    let mut per_trial = Vec::with_capacity(config.trials);
    let mut retries_used = 0usize;
    for trial in 0..config.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ trial as u64);
        let mut attempts = 0usize;
        let sample = loop {
            attempts += 1;
            if attempts > config.max_retries {
                return Err(EvaluationError::RetriesExhausted(config.max_retries));
            }
            let m =
                HomogeneousPoint2::new(rng.random_range(0.0..width), rng.random_range(0.0..height));
            // The true and estimated lines of m in the right image.
            let l0 = line_through(f0, &m, false);
            let l1 = line_through(f1, &m, false);
            let Some((start, end)) = clip_line_to_rect(&l0, width, height) else {
                retries_used += 1;
                continue;
            };
            if clip_line_to_rect(&l1, width, height).is_none() {
                retries_used += 1;
                continue;
            }
            // A ground-truth-consistent right point, uniform along the
            // visible part of l0.
            let u: f64 = rng.random_range(0.0..1.0);
            let m_prime = HomogeneousPoint2::new(
                start.0 + u * (end.0 - start.0),
                start.1 + u * (end.1 - start.1),
            );
            // The estimated line of m' back in the left image.
            let l1_prime = line_through(f1, &m_prime, true);
            if clip_line_to_rect(&l1_prime, width, height).is_none() {
                retries_used += 1;
                continue;
            }
            let Ok(d_prime) = point_line_distance(&l1, &m_prime) else {
                retries_used += 1;
                continue;
            };
            let Ok(d) = point_line_distance(&l1_prime, &m) else {
                retries_used += 1;
                continue;
            };
            break (d, d_prime);
        };
        per_trial.push(sample);
    }
    let total: f64 = per_trial.iter().map(|(d, dp)| d + dp).sum();
    let d1 = total / (2.0 * per_trial.len() as f64);
    Ok(EvaluationReport {
        d1,
        per_trial,
        retries_used,
    })
}

/// The estimators a benchmark can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    EightPoint,
    SevenPoint,
    Ransac,
    Lmeds,
    Proposed,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::EightPoint,
        Method::SevenPoint,
        Method::Ransac,
        Method::Lmeds,
        Method::Proposed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::EightPoint => "eight-point",
            Method::SevenPoint => "seven-point",
            Method::Ransac => "ransac",
            Method::Lmeds => "lmeds",
            Method::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eight-point" | "8-point" => Ok(Method::EightPoint),
            "seven-point" | "7-point" => Ok(Method::SevenPoint),
            "ransac" => Ok(Method::Ransac),
            "lmeds" => Ok(Method::Lmeds),
            "proposed" => Ok(Method::Proposed),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Shared knobs for a benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkParams {
    pub th: f64,
    pub confidence: f64,
    pub alpha: f64,
    pub dc_fraction: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub lmeds_trials: usize,
    pub normalize: bool,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        Self {
            th: 1.0,
            confidence: 0.99,
            alpha: 0.011,
            dc_fraction: 0.02,
            seed: 0,
            max_iterations: 1000,
            lmeds_trials: 500,
            normalize: true,
        }
    }
}

impl BenchmarkParams {
    fn ransac_config(&self) -> RansacConfig {
        RansacConfig {
            th: self.th,
            confidence: self.confidence,
            max_iterations: self.max_iterations,
            seed: self.seed,
            normalize: self.normalize,
        }
    }
}

/// One benchmark result row. Failed methods carry their error label in
/// `status` instead of crashing the run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub method: String,
    pub th: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub time_ms: f64,
    pub mean_error_px: Option<f64>,
    pub d1_px: Option<f64>,
    pub status: String,
}

impl BenchmarkRow {
    pub fn csv_header() -> &'static str {
        "method,th,alpha,seed,time_ms,mean_error_px,d1_px,status"
    }

    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            opt(self.th),
            opt(self.alpha),
            self.seed,
            self.time_ms,
            opt(self.mean_error_px),
            opt(self.d1_px),
            self.status
        )
    }
}

fn mean_distance_over(pairs: &[MatchPair], f: &FundamentalMatrix) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for pair in pairs {
        if let Ok(d) = symmetric_epipolar_distance(f.as_matrix(), pair) {
            sum += d;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

fn run_method(
    method: Method,
    pairs: &[MatchPair],
    params: &BenchmarkParams,
) -> Result<(FundamentalMatrix, Option<f64>), String> {
    match method {
        Method::EightPoint => {
            let f = eight_point(pairs, params.normalize).map_err(|e| e.to_string())?;
            let mean = mean_distance_over(pairs, &f);
            Ok((f, mean))
        }
        Method::SevenPoint => {
            if pairs.len() < 7 {
                return Err("need at least 7 pairs".into());
            }
            // Minimal solver on the first seven pairs; pick the candidate
            // that explains the full set best.
            let candidates = seven_point(&pairs[..7]).map_err(|e| e.to_string())?;
            let best = candidates
                .into_iter()
                .filter_map(|f| mean_distance_over(pairs, &f).map(|m| (m, f)))
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                .ok_or_else(|| "no scorable candidate".to_string())?;
            Ok((best.1, Some(best.0)))
        }
        Method::Ransac => {
            let result = ransac(pairs, &params.ransac_config()).map_err(|e| e.to_string())?;
            Ok((result.f_matrix, Some(result.mean_inlier_error)))
        }
        Method::Lmeds => {
            let result =
                lmeds(pairs, params.lmeds_trials, params.seed).map_err(|e| e.to_string())?;
            Ok((result.f_matrix, Some(result.mean_inlier_error)))
        }
        Method::Proposed => {
            let config = PipelineConfig {
                alpha: params.alpha,
                dc_fraction: params.dc_fraction,
                ransac: params.ransac_config(),
            };
            let report = clustering_assisted_estimate(pairs, &config).map_err(|e| e.to_string())?;
            Ok((
                report.estimate.f_matrix,
                Some(report.estimate.mean_inlier_error),
            ))
        }
    }
}

fn method_th(method: Method, params: &BenchmarkParams) -> Option<f64> {
    match method {
        Method::Ransac | Method::Proposed => Some(params.th),
        _ => None,
    }
}

fn method_alpha(method: Method, params: &BenchmarkParams) -> Option<f64> {
    matches!(method, Method::Proposed).then_some(params.alpha)
}

/// Run each method on the dataset, recording wall time, the mean pixel
/// error, and (when ground truth is supplied) the Zhang distance to `f0`.
/// Rows come back sorted by method name, then threshold, then alpha.
pub fn benchmark(
    pairs: &[MatchPair],
    f0: Option<&FundamentalMatrix>,
    methods: &[Method],
    params: &BenchmarkParams,
    eval: &EvaluationConfig,
) -> Vec<BenchmarkRow> {
    let mut rows: Vec<BenchmarkRow> = methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(method, pairs, params);
            let time_ms = start.elapsed().as_secs_f64() * 1e3;
            match outcome {
                Ok((f, mean_error_px)) => {
                    let d1_px = f0.and_then(|truth| {
                        zhang_error(truth, &f, eval).ok().map(|report| report.d1)
                    });
                    BenchmarkRow {
                        method: method.name().to_string(),
                        th: method_th(method, params),
                        alpha: method_alpha(method, params),
                        seed: params.seed,
                        time_ms,
                        mean_error_px,
                        d1_px,
                        status: "ok".to_string(),
                    }
                }
                Err(label) => BenchmarkRow {
                    method: method.name().to_string(),
                    th: method_th(method, params),
                    alpha: method_alpha(method, params),
                    seed: params.seed,
                    time_ms,
                    mean_error_px: None,
                    d1_px: None,
                    status: label,
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (
            &a.method,
            a.th.unwrap_or(f64::NAN),
            a.alpha.unwrap_or(f64::NAN),
        )
            .partial_cmp(&(
                &b.method,
                b.th.unwrap_or(f64::NAN),
                b.alpha.unwrap_or(f64::NAN),
            ))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}
