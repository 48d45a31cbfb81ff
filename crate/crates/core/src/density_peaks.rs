//! Clustering by fast search of density peaks over 4-D match vectors.
//!
//! Each correspondence becomes a point q = (x, y, x', y'). A point's local
//! density `rho` counts neighbors strictly within the cutoff `d_c`, and its
//! separation `delta` is the distance to the nearest point of higher density
//! (row maximum for the densest point). Matches whose product
//! `gamma = rho * delta` clears `alpha * rho_max * delta_max` are kept as
//! reliable inliers.

use thiserror::Error;

use crate::geometry::MatchPair;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("neighborhood fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
}

/// A correspondence embedded in 4-D: (x, y, x', y').
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchVector4(pub [f64; 4]);

impl MatchVector4 {
    pub fn from_pair(pair: &MatchPair) -> Self {
        Self([pair.left.x, pair.left.y, pair.right.x, pair.right.y])
    }

    pub fn to_pair(self) -> MatchPair {
        MatchPair::new(self.0[0], self.0[1], self.0[2], self.0[3])
    }

    pub fn distance(&self, other: &MatchVector4) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Embed every pair, preserving order.
pub fn build_match_vectors(pairs: &[MatchPair]) -> Vec<MatchVector4> {
    pairs.iter().map(MatchVector4::from_pair).collect()
}

/// Full N x N symmetric Euclidean distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// The strict upper triangle (i < j), row by row.
    pub fn pair_distances(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

pub fn pairwise_distances(vectors: &[MatchVector4]) -> Result<DistanceMatrix, ClusterError> {
    let n = vectors.len();
    if n < 2 {
        return Err(ClusterError::TooFewPoints { got: n, need: 2 });
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = vectors[i].distance(&vectors[j]);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, values })
}

/// Pick the cutoff distance as an order statistic of the sorted pair
/// distances: rank `ceil(target_fraction * N(N-1)/2)`, one-based, raised to
/// at least `ceil(N/2)` so small point sets keep nonempty neighborhoods
/// (inclusive mean density >= 1).
pub fn select_dc(d: &DistanceMatrix, target_fraction: f64) -> Result<f64, ClusterError> {
    let n = d.len();
    if n < 2 {
        return Err(ClusterError::TooFewPoints { got: n, need: 2 });
    }
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(ClusterError::InvalidFraction(target_fraction));
    }
    let mut all = d.pair_distances();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pair_count = all.len();
    let by_target = (target_fraction * pair_count as f64).ceil() as usize;
    let floor = n.div_ceil(2);
    let rank = by_target.max(floor).max(1).min(pair_count);
    Ok(all[rank - 1])
}

/// `rho_i = #{ j != i : d_ij < d_c }` (strict inequality; self excluded).
pub fn local_density(d: &DistanceMatrix, d_c: f64) -> Vec<usize> {
    let n = d.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && d.get(i, j) < d_c).count())
        .collect()
}

/// Separations and nearest-higher-density parents under the strict total
/// density order "higher rho wins, ties to the smaller index". The unique
/// top-ranked point gets its row maximum as delta and no parent.
pub fn delta_and_parents(d: &DistanceMatrix, rho: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = d.len();
    assert_eq!(rho.len(), n, "density vector does not match the matrix");
    let outranks = |j: usize, i: usize| rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
    let mut delta = vec![0.0; n];
    let mut parent = vec![None; n];
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if j == i || !outranks(j, i) {
                continue;
            }
            let dij = d.get(i, j);
            if best.is_none_or(|(bd, _)| dij < bd) {
                best = Some((dij, j));
            }
        }
        match best {
            Some((dist, j)) => {
                delta[i] = dist;
                parent[i] = Some(j);
            }
            None => {
                // The top-ranked point.
                delta[i] = (0..n).map(|j| d.get(i, j)).fold(0.0, f64::max);
                parent[i] = None;
            }
        }
    }
    (delta, parent)
}

/// Per-point density-peaks quantities over one distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPeaksResult {
    pub rho: Vec<usize>,
    pub delta: Vec<f64>,
    pub nearest_higher: Vec<Option<usize>>,
    /// `gamma_i = rho_i * delta_i`, the decision-figure product.
    pub gamma: Vec<f64>,
    pub d_c: f64,
}

/// Run the full density computation for a given cutoff.
pub fn density_peaks(d: &DistanceMatrix, d_c: f64) -> DensityPeaksResult {
    let rho = local_density(d, d_c);
    let (delta, nearest_higher) = delta_and_parents(d, &rho);
    let gamma = rho
        .iter()
        .zip(&delta)
        .map(|(&r, &dl)| r as f64 * dl)
        .collect();
    DensityPeaksResult {
        rho,
        delta,
        nearest_higher,
        gamma,
        d_c,
    }
}

/// The gamma-threshold selection: indices kept as inliers.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSelection {
    pub alpha: f64,
    pub inlier_indices: Vec<usize>,
    /// `alpha * rho_max * delta_max`; points with gamma below it are outliers.
    pub threshold_value: f64,
}

/// Keep every point whose gamma reaches `alpha * rho_max * delta_max`. A zero
/// threshold (alpha = 0 or fully degenerate data) keeps everything.
pub fn select_inliers(result: &DensityPeaksResult, alpha: f64) -> ClusterSelection {
    let rho_max = result.rho.iter().copied().max().unwrap_or(0) as f64;
    let delta_max = result.delta.iter().copied().fold(0.0, f64::max);
    let threshold_value = alpha * rho_max * delta_max;
    let inlier_indices = result
        .gamma
        .iter()
        .enumerate()
        .filter(|(_, &g)| g >= threshold_value)
        .map(|(i, _)| i)
        .collect();
    ClusterSelection {
        alpha,
        inlier_indices,
        threshold_value,
    }
}
