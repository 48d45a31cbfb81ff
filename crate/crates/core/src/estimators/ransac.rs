//! RANSAC over 8-point fits, scored by the symmetric point-to-epipolar-line
//! distance with an adaptive iteration bound.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::estimators::linear::eight_point;
use crate::estimators::{EstimateResult, EstimatorError, RansacConfig, SAMPLE_SIZE};
use crate::geometry::{symmetric_epipolar_distance, FundamentalMatrix, MatchPair};

/// Number of iterations needed to draw at least one all-inlier sample with
/// probability `confidence`, from `1 - p = (1 - w^s)^k`. Returns 1 when the
/// inlier ratio is 1; saturates when the ratio is tiny.
pub fn required_iterations(confidence: f64, inlier_ratio: f64, sample_size: usize) -> usize {
    if inlier_ratio >= 1.0 {
        return 1;
    }
    let success = inlier_ratio.powi(sample_size as i32);
    let denom = (1.0 - success).ln();
    if denom == 0.0 {
        return usize::MAX;
    }
    let k = ((1.0 - confidence).ln() / denom).ceil();
    if !k.is_finite() || k >= 1e18 {
        return usize::MAX;
    }
    (k as usize).max(1)
}

struct Candidate {
    f: FundamentalMatrix,
    mask: Vec<bool>,
    count: usize,
    mean_error: f64,
}

fn score(pairs: &[MatchPair], f: &FundamentalMatrix, th: f64) -> (Vec<bool>, usize, f64) {
    let mut mask = vec![false; pairs.len()];
    let mut count = 0usize;
    let mut sum = 0.0;
    for (i, pair) in pairs.iter().enumerate() {
        if let Ok(d) = symmetric_epipolar_distance(f.as_matrix(), pair) {
            if d <= th {
                mask[i] = true;
                count += 1;
                sum += d;
            }
        }
    }
    let mean = if count > 0 {
        sum / count as f64
    } else {
        f64::INFINITY
    };
    (mask, count, mean)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RansacTimings {
    pub search: Duration,
    pub refit: Duration,
}

pub(crate) fn ransac_instrumented(
    pairs: &[MatchPair],
    config: &RansacConfig,
) -> Result<(EstimateResult, RansacTimings), EstimatorError> {
    let start = Instant::now();
    config.validate()?;
    let n = pairs.len();
    if n < SAMPLE_SIZE {
        return Err(EstimatorError::TooFewPairs {
            got: n,
            need: SAMPLE_SIZE,
        });
    }

    let mut bound = config.max_iterations;
    let mut best: Option<Candidate> = None;
    let mut iterations = 0usize;
    while iterations < bound {
        // Per-iteration RNG stream so iterations could run concurrently and
        // still reproduce the sequential result.
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ iterations as u64);
        iterations += 1;
        let picks = index::sample(&mut rng, n, SAMPLE_SIZE);
        let sample: Vec<MatchPair> = picks.iter().map(|i| pairs[i]).collect();
        // Degenerate samples still count toward the iteration cap.
        let Ok(f) = eight_point(&sample, config.normalize) else {
            continue;
        };
        let (mask, count, mean_error) = score(pairs, &f, config.th);
        if count < SAMPLE_SIZE {
            continue;
        }
        let improves = match &best {
            None => true,
            Some(b) => count > b.count || (count == b.count && mean_error < b.mean_error),
        };
        if improves {
            best = Some(Candidate {
                f,
                mask,
                count,
                mean_error,
            });
            let needed =
                required_iterations(config.confidence, count as f64 / n as f64, SAMPLE_SIZE);
            bound = bound.min(needed);
        }
    }
    let best = best.ok_or(EstimatorError::NoConsensus)?;
    let search = start.elapsed();

    // Refit on the consensus set, then rescore so the reported mask is
    // consistent with the reported matrix. Fall back to the sample model if
    // the refit collapses.
    let refit_start = Instant::now();
    let consensus: Vec<MatchPair> = pairs
        .iter()
        .zip(&best.mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect();
    let (f, mask, mean_error) = match eight_point(&consensus, config.normalize) {
        Ok(refit) => {
            let (mask, count, mean_error) = score(pairs, &refit, config.th);
            if count >= SAMPLE_SIZE {
                (refit, mask, mean_error)
            } else {
                (best.f, best.mask, best.mean_error)
            }
        }
        Err(_) => (best.f, best.mask, best.mean_error),
    };
    let refit = refit_start.elapsed();

    Ok((
        EstimateResult {
            f_matrix: f,
            inlier_mask: mask,
            iterations_used: iterations,
            mean_inlier_error: mean_error,
            elapsed: start.elapsed(),
        },
        RansacTimings { search, refit },
    ))
}

/// Robust fundamental-matrix estimation by random sample consensus.
/// Deterministic for a fixed seed (timing fields aside).
pub fn ransac(
    pairs: &[MatchPair],
    config: &RansacConfig,
) -> Result<EstimateResult, EstimatorError> {
    ransac_instrumented(pairs, config).map(|(result, _)| result)
}
