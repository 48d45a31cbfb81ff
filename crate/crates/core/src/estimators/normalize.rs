//! Hartley point conditioning: translate the centroid to the origin and
//! scale so the mean distance from the origin is sqrt(2). Linear fits on
//! raw pixel coordinates are badly conditioned without it.

use nalgebra::Matrix3;

use crate::estimators::EstimatorError;
use crate::geometry::HomogeneousPoint2;

/// The pair of similarity transforms applied to the left and right point
/// sets before a linear fit.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationTransform {
    pub left: Matrix3<f64>,
    pub right: Matrix3<f64>,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        Self {
            left: Matrix3::identity(),
            right: Matrix3::identity(),
        }
    }

    /// Map a fundamental matrix solved in normalized coordinates back to
    /// pixel coordinates: `F = T_right^T * F_norm * T_left`.
    pub fn denormalize(&self, f_norm: &Matrix3<f64>) -> Matrix3<f64> {
        self.right.transpose() * f_norm * self.left
    }
}

/// Normalize one point set; returns the transformed points and the 3x3
/// similarity transform that produced them.
pub fn hartley_normalize(
    points: &[HomogeneousPoint2],
) -> Result<(Vec<HomogeneousPoint2>, Matrix3<f64>), EstimatorError> {
    if points.len() < 2 {
        return Err(EstimatorError::DegenerateInput);
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| (p.x - cx).hypot(p.y - cy))
        .sum::<f64>()
        / n;
    if mean_dist <= 1e-12 * (1.0 + cx.abs().max(cy.abs())) {
        return Err(EstimatorError::DegenerateInput);
    }
    let scale = 2.0_f64.sqrt() / mean_dist;
    let transform = Matrix3::new(
        scale,
        0.0,
        -scale * cx,
        0.0,
        scale,
        -scale * cy,
        0.0,
        0.0,
        1.0,
    );
    let mapped = points
        .iter()
        .map(|p| HomogeneousPoint2::new(scale * (p.x - cx), scale * (p.y - cy)))
        .collect();
    Ok((mapped, transform))
}
