//! Ground-truth scene generator: random 3-D points projected through two
//! known pinhole cameras, with Gaussian pixel noise and planted outliers,
//! plus the closed-form ground-truth fundamental matrix.

use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};
use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::{FundamentalMatrix, MatchPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("camera centers coincide; the fundamental matrix is undefined")]
    CoincidentCenters,
    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("no 3-D points visible in both cameras after {0} rejection samples")]
    FrustumEmpty(usize),
    #[error("invalid scene configuration: {0}")]
    InvalidConfig(String),
}

/// A finite projective camera `P = K [R | t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    k: Matrix3<f64>,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    projection: Matrix3x4<f64>,
}

impl CameraModel {
    pub fn new(
        focal: f64,
        principal: (f64, f64),
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Result<Self, SceneError> {
        let gram = rotation.transpose() * rotation;
        if (gram - Matrix3::identity()).norm() > 1e-12 * 3.0
            || (rotation.determinant() - 1.0).abs() > 1e-12 * 3.0
        {
            return Err(SceneError::InvalidRotation);
        }
        let k = Matrix3::new(
            focal,
            0.0,
            principal.0,
            0.0,
            focal,
            principal.1,
            0.0,
            0.0,
            1.0,
        );
        let mut projection = Matrix3x4::zeros();
        projection
            .fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(k * rotation));
        projection.set_column(3, &(k * translation));
        Ok(Self {
            k,
            rotation,
            translation,
            projection,
        })
    }

    pub fn projection(&self) -> &Matrix3x4<f64> {
        &self.projection
    }

    /// The camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -self.rotation.transpose() * self.translation
    }

    /// Project a world point; `None` when it lies at or behind the camera.
    pub fn project(&self, point: &Vector3<f64>) -> Option<(f64, f64)> {
        let cam = self.rotation * point + self.translation;
        if cam.z <= 1e-9 {
            return None;
        }
        let pix = self.k * cam;
        Some((pix.x / pix.z, pix.y / pix.z))
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Closed-form ground truth from two cameras: `F = [e']_x P' P^+` with
/// `e' = P' C`, `C` the left camera's center. Satisfies `m'^T F m = 0` for
/// every 3-D point's projections.
pub fn f_from_cameras(
    left: &CameraModel,
    right: &CameraModel,
) -> Result<FundamentalMatrix, SceneError> {
    let c_left = left.center();
    let baseline = (c_left - right.center()).norm();
    if baseline <= 1e-12 * (1.0 + c_left.norm()) {
        return Err(SceneError::CoincidentCenters);
    }
    let c_h = Vector4::new(c_left.x, c_left.y, c_left.z, 1.0);
    let e_prime = right.projection() * c_h;
    let p_pinv = left
        .projection()
        .pseudo_inverse(1e-12)
        .map_err(|_| SceneError::CoincidentCenters)?;
    let f = skew(&e_prime) * right.projection() * p_pinv;
    FundamentalMatrix::enforce_rank2(&f).map_err(|_| SceneError::CoincidentCenters)
}

/// Scene parameters. Defaults: a 640x480 image, 500 px focal length,
/// centered principal point, depth range 4-8 world units, a baseline of 1.2
/// (0.2 of the mean scene depth) along x, and up to 5 degrees of relative
/// rotation per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSceneConfig {
    pub num_points: usize,
    /// Standard deviation of the i.i.d. Gaussian noise added to every
    /// projected coordinate, pixels.
    pub noise_sigma: f64,
    /// Share of pairs whose right point is replaced by a uniform random
    /// in-bounds point, in [0, 1).
    pub outlier_fraction: f64,
    pub image_size: (f64, f64),
    pub depth_range: (f64, f64),
    pub baseline: f64,
    pub max_rotation_deg: f64,
    pub focal: f64,
    pub seed: u64,
}

impl Default for SyntheticSceneConfig {
    fn default() -> Self {
        Self {
            num_points: 200,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            image_size: (640.0, 480.0),
            depth_range: (4.0, 8.0),
            baseline: 1.2,
            max_rotation_deg: 5.0,
            focal: 500.0,
            seed: 0,
        }
    }
}

impl SyntheticSceneConfig {
    fn validate(&self) -> Result<(), SceneError> {
        if self.num_points < 8 {
            return Err(SceneError::InvalidConfig(format!(
                "need at least 8 points, got {}",
                self.num_points
            )));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(SceneError::InvalidConfig(format!(
                "outlier fraction must lie in [0, 1), got {}",
                self.outlier_fraction
            )));
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(SceneError::InvalidConfig(
                "noise sigma must be non-negative".into(),
            ));
        }
        if !(self.image_size.0 > 0.0 && self.image_size.1 > 0.0) {
            return Err(SceneError::InvalidConfig(
                "image size must be positive".into(),
            ));
        }
        if !(self.depth_range.0 > 0.0 && self.depth_range.1 >= self.depth_range.0) {
            return Err(SceneError::InvalidConfig(
                "depth range must be positive and ordered".into(),
            ));
        }
        if self.baseline.is_nan() || self.baseline <= 0.0 {
            return Err(SceneError::InvalidConfig(
                "baseline must be positive".into(),
            ));
        }
        if self.focal.is_nan() || self.focal <= 0.0 {
            return Err(SceneError::InvalidConfig(
                "focal length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A generated two-view scene with exact ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub pairs: Vec<MatchPair>,
    /// `true` for genuine correspondences, `false` for planted outliers.
    pub truth_mask: Vec<bool>,
    pub f0: FundamentalMatrix,
    pub cameras: (CameraModel, CameraModel),
}

impl SyntheticScene {
    pub fn outlier_count(&self) -> usize {
        self.truth_mask.iter().filter(|&&t| !t).count()
    }
}

const MAX_CONSECUTIVE_REJECTIONS: usize = 10_000;

/// Generate a scene: sample 3-D points visible in both views (rejection
/// sampling keeps every exact projection inside the image bounds), add
/// Gaussian noise, then plant `round(outlier_fraction * N)` gross mismatches.
/// Bit-identical for equal configurations.
pub fn generate_scene(config: &SyntheticSceneConfig) -> Result<SyntheticScene, SceneError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let (width, height) = config.image_size;
    let principal = (width / 2.0, height / 2.0);

    let left = CameraModel::new(
        config.focal,
        principal,
        Matrix3::identity(),
        Vector3::zeros(),
    )?;
    let max_rot = config.max_rotation_deg.to_radians();
    let angles: [f64; 3] = std::array::from_fn(|_| rng.random_range(-max_rot..=max_rot));
    let rotation =
        *nalgebra::Rotation3::from_euler_angles(angles[0], angles[1], angles[2]).matrix();
    let center2 = Vector3::new(config.baseline, 0.0, 0.0);
    let right = CameraModel::new(config.focal, principal, rotation, -rotation * center2)?;
    let f0 = f_from_cameras(&left, &right)?;

    // Exact projections first: back-project a uniform left-image pixel at a
    // uniform depth, keep it when the right camera sees it in bounds.
    let mut exact: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(config.num_points);
    let mut rejections = 0usize;
    while exact.len() < config.num_points {
        let u1 = rng.random_range(0.0..width);
        let v1 = rng.random_range(0.0..height);
        let z = rng.random_range(config.depth_range.0..=config.depth_range.1);
        let world = Vector3::new(
            z * (u1 - principal.0) / config.focal,
            z * (v1 - principal.1) / config.focal,
            z,
        );
        match right.project(&world) {
            Some((u2, v2)) if (0.0..width).contains(&u2) && (0.0..height).contains(&v2) => {
                exact.push((u1, v1, u2, v2));
                rejections = 0;
            }
            _ => {
                rejections += 1;
                if rejections > MAX_CONSECUTIVE_REJECTIONS {
                    return Err(SceneError::FrustumEmpty(MAX_CONSECUTIVE_REJECTIONS));
                }
            }
        }
    }

    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|_| SceneError::InvalidConfig("noise sigma must be non-negative".into()))?;
    let mut pairs: Vec<MatchPair> = exact
        .iter()
        .map(|&(u1, v1, u2, v2)| {
            MatchPair::new(
                u1 + noise.sample(&mut rng),
                v1 + noise.sample(&mut rng),
                u2 + noise.sample(&mut rng),
                v2 + noise.sample(&mut rng),
            )
        })
        .collect();

    let mut truth_mask = vec![true; config.num_points];
    let outliers = (config.outlier_fraction * config.num_points as f64).round() as usize;
    if outliers > 0 {
        let picks = index::sample(&mut rng, config.num_points, outliers);
        for i in picks {
            pairs[i].right.x = rng.random_range(0.0..width);
            pairs[i].right.y = rng.random_range(0.0..height);
            truth_mask[i] = false;
        }
    }

    Ok(SyntheticScene {
        pairs,
        truth_mask,
        f0,
        cameras: (left, right),
    })
}
