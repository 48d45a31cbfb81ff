//! Linear fundamental-matrix solvers: the stacked epipolar constraint
//! system, the 8-point algorithm, and the 7-point minimal solver.

use nalgebra::{DMatrix, Matrix3};

use crate::estimators::normalize::{hartley_normalize, NormalizationTransform};
use crate::estimators::poly::real_cubic_roots;
use crate::estimators::{EstimatorError, RANK_RATIO_EPS};
use crate::geometry::{FundamentalMatrix, MatchPair};

/// The N x 9 system `A f = 0` stacked from the epipolar constraints, one row
/// `a_n = (x x', y x', x', x y', y y', y', x, y, 1)` per pair.
#[derive(Debug, Clone)]
pub struct EpipolarLinearSystem {
    rows: DMatrix<f64>,
}

impl EpipolarLinearSystem {
    pub fn from_pairs(pairs: &[MatchPair]) -> Result<Self, EstimatorError> {
        if pairs.len() < 7 {
            return Err(EstimatorError::TooFewPairs {
                got: pairs.len(),
                need: 7,
            });
        }
        let mut rows = DMatrix::zeros(pairs.len(), 9);
        for (n, pair) in pairs.iter().enumerate() {
            let (x, y) = (pair.left.x, pair.left.y);
            let (xp, yp) = (pair.right.x, pair.right.y);
            rows[(n, 0)] = x * xp;
            rows[(n, 1)] = y * xp;
            rows[(n, 2)] = xp;
            rows[(n, 3)] = x * yp;
            rows[(n, 4)] = y * yp;
            rows[(n, 5)] = yp;
            rows[(n, 6)] = x;
            rows[(n, 7)] = y;
            rows[(n, 8)] = 1.0;
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// All nine singular values in descending order, plus the right singular
    /// vectors of the `tail` smallest ones reshaped into 3x3 matrices
    /// (smallest first). The system is zero-padded to at least nine rows so
    /// the full right basis exists even for minimal samples.
    pub(crate) fn tail_singular_triplets(&self, tail: usize) -> (Vec<f64>, Vec<Matrix3<f64>>) {
        let nrows = self.rows.nrows().max(9);
        let mut padded = DMatrix::zeros(nrows, 9);
        padded
            .view_mut((0, 0), (self.rows.nrows(), 9))
            .copy_from(&self.rows);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("svd computed with right vectors");
        let mut order: Vec<usize> = (0..9).collect();
        order.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .unwrap()
        });
        let sigmas: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let mats = order[9 - tail..]
            .iter()
            .rev()
            .map(|&i| {
                let v = v_t.row(i);
                Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8])
            })
            .collect();
        (sigmas, mats)
    }
}

fn split_and_normalize(
    pairs: &[MatchPair],
    normalize: bool,
) -> Result<(Vec<MatchPair>, NormalizationTransform), EstimatorError> {
    if !normalize {
        return Ok((pairs.to_vec(), NormalizationTransform::identity()));
    }
    let left: Vec<_> = pairs.iter().map(|p| p.left).collect();
    let right: Vec<_> = pairs.iter().map(|p| p.right).collect();
    let (left_n, t_left) = hartley_normalize(&left)?;
    let (right_n, t_right) = hartley_normalize(&right)?;
    let mapped = left_n
        .into_iter()
        .zip(right_n)
        .map(|(l, r)| MatchPair { left: l, right: r })
        .collect();
    Ok((
        mapped,
        NormalizationTransform {
            left: t_left,
            right: t_right,
        },
    ))
}

/// The 8-point algorithm: the unit-norm least-squares solution of the
/// stacked constraints, rank-2 enforced and canonicalized. With `normalize`
/// set the system is solved in Hartley-normalized coordinates and the result
/// mapped back before canonicalization.
pub fn eight_point(
    pairs: &[MatchPair],
    normalize: bool,
) -> Result<FundamentalMatrix, EstimatorError> {
    if pairs.len() < 8 {
        return Err(EstimatorError::TooFewPairs {
            got: pairs.len(),
            need: 8,
        });
    }
    let (working, transform) = split_and_normalize(pairs, normalize)?;
    let system = EpipolarLinearSystem::from_pairs(&working)?;
    let (sigmas, vecs) = system.tail_singular_triplets(1);
    if sigmas[0] <= 0.0 || sigmas[7] / sigmas[0] < RANK_RATIO_EPS {
        return Err(EstimatorError::DegenerateConfiguration);
    }
    let f = transform.denormalize(&vecs[0]);
    FundamentalMatrix::enforce_rank2(&f).map_err(|_| EstimatorError::DegenerateConfiguration)
}

/// The 7-point minimal solver: spans the 2-dimensional nullspace of the
/// 7-row system and solves the cubic `det(lambda F_a + (1 - lambda) F_b) = 0`,
/// yielding one to three candidates. Every candidate is rank-2 and satisfies
/// all seven constraints.
pub fn seven_point(pairs: &[MatchPair]) -> Result<Vec<FundamentalMatrix>, EstimatorError> {
    if pairs.len() != 7 {
        return Err(EstimatorError::WrongSampleSize {
            got: pairs.len(),
            need: 7,
        });
    }
    let (working, transform) = split_and_normalize(pairs, true)?;
    let system = EpipolarLinearSystem::from_pairs(&working)?;
    let (sigmas, vecs) = system.tail_singular_triplets(2);
    if sigmas[0] <= 0.0 || sigmas[6] / sigmas[0] < RANK_RATIO_EPS {
        return Err(EstimatorError::DegenerateConfiguration);
    }
    let f_a = vecs[0];
    let f_b = vecs[1];

    // det(lambda F_a + (1 - lambda) F_b) is cubic in lambda; interpolate its
    // coefficients from four evaluations.
    let det_at = |lambda: f64| (f_a * lambda + f_b * (1.0 - lambda)).determinant();
    let p0 = det_at(0.0);
    let p1 = det_at(1.0);
    let pm1 = det_at(-1.0);
    let p2 = det_at(2.0);
    let c0 = p0;
    let c2 = 0.5 * (p1 + pm1) - p0;
    let odd = 0.5 * (p1 - pm1); // c3 + c1
    let c3 = (p2 - c0 - 4.0 * c2 - 2.0 * odd) / 6.0;
    let c1 = odd - c3;

    let mut lambdas = real_cubic_roots(c3, c2, c1, c0);
    let coeff_scale = [c3, c2, c1, c0].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if coeff_scale > 0.0 && c3.abs() < 1e-12 * coeff_scale {
        // The degree dropped: the solution "at infinity" is the direction
        // F_a - F_b, which then has zero determinant itself.
        if (f_a - f_b).determinant().abs() < 1e-9 {
            lambdas.push(f64::INFINITY);
        }
    }

    let mut out: Vec<FundamentalMatrix> = Vec::new();
    for lambda in lambdas {
        let f_norm = if lambda.is_finite() {
            f_a * lambda + f_b * (1.0 - lambda)
        } else {
            f_a - f_b
        };
        if f_norm.norm() < 1e-12 {
            continue;
        }
        let f = transform.denormalize(&f_norm);
        let Ok(candidate) = FundamentalMatrix::enforce_rank2(&f) else {
            continue;
        };
        if out.iter().all(|c| c.max_abs_diff(&candidate) > 1e-9) {
            out.push(candidate);
        }
        if out.len() == 3 {
            break;
        }
    }
    if out.is_empty() {
        // Unreachable for a rank-7 system: a real cubic has a real root.
        return Err(EstimatorError::DegenerateConfiguration);
    }
    Ok(out)
}
