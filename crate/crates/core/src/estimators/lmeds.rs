//! Least median of squares: random 7-point candidates scored by the median
//! of squared symmetric epipolar distances, with Rousseeuw's robust-scale
//! inlier cut and a final 8-point refit.

use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::estimators::linear::{eight_point, seven_point};
use crate::estimators::{EstimateResult, EstimatorError, SAMPLE_SIZE};
use crate::geometry::{symmetric_epipolar_distance, FundamentalMatrix, MatchPair};

/// Floor on the robust scale so an exact fit (median ~ 0 up to rounding)
/// still admits every pair.
const SCALE_FLOOR: f64 = 1e-6;

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n.is_multiple_of(2) {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    } else {
        values[n / 2]
    }
}

fn squared_distances(pairs: &[MatchPair], f: &FundamentalMatrix) -> Vec<f64> {
    pairs
        .iter()
        .map(|p| match symmetric_epipolar_distance(f.as_matrix(), p) {
            Ok(d) => d * d,
            Err(_) => f64::INFINITY,
        })
        .collect()
}

/// LMedS estimation over `trials` random 7-point samples. Deterministic for
/// a fixed seed.
pub fn lmeds(
    pairs: &[MatchPair],
    trials: usize,
    seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    let start = Instant::now();
    let n = pairs.len();
    if n < SAMPLE_SIZE {
        return Err(EstimatorError::TooFewPairs {
            got: n,
            need: SAMPLE_SIZE,
        });
    }
    if trials == 0 {
        return Err(EstimatorError::InvalidConfig(
            "trials must be at least 1".into(),
        ));
    }

    let mut best: Option<(f64, FundamentalMatrix)> = None;
    for trial in 0..trials {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ trial as u64);
        let picks = index::sample(&mut rng, n, 7);
        let sample: Vec<MatchPair> = picks.iter().map(|i| pairs[i]).collect();
        let Ok(candidates) = seven_point(&sample) else {
            continue;
        };
        for candidate in candidates {
            let med = median(squared_distances(pairs, &candidate));
            let improves = best.as_ref().is_none_or(|(m, _)| med < *m);
            if improves {
                best = Some((med, candidate));
            }
        }
    }
    let (min_median, model) = best.ok_or(EstimatorError::NoConsensus)?;

    // Rousseeuw's finite-sample robust scale and the 2.5-sigma inlier cut.
    let scale = (1.4826 * (1.0 + 5.0 / (n - 7) as f64) * min_median.sqrt()).max(SCALE_FLOOR);
    let cut = (2.5 * scale) * (2.5 * scale);
    let squared = squared_distances(pairs, &model);
    let mask: Vec<bool> = squared.iter().map(|&d2| d2 <= cut).collect();
    let count = mask.iter().filter(|&&m| m).count();
    if count < SAMPLE_SIZE {
        return Err(EstimatorError::NoConsensus);
    }

    let inliers: Vec<MatchPair> = pairs
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect();
    let f_matrix = eight_point(&inliers, true).unwrap_or(model);
    let mean_inlier_error = {
        let mut sum = 0.0;
        let mut k = 0usize;
        for (pair, &m) in pairs.iter().zip(&mask) {
            if m {
                if let Ok(d) = symmetric_epipolar_distance(f_matrix.as_matrix(), pair) {
                    sum += d;
                    k += 1;
                }
            }
        }
        if k > 0 {
            sum / k as f64
        } else {
            f64::INFINITY
        }
    };

    Ok(EstimateResult {
        f_matrix,
        inlier_mask: mask,
        iterations_used: trials,
        mean_inlier_error,
        elapsed: start.elapsed(),
    })
}
