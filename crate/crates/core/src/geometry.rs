//! Homogeneous 2-D geometry primitives: epipolar residuals, epipolar lines,
//! point-to-line distances, and fundamental matrices in a canonical scale.
//!
//! All points read from match files carry `w = 1`. A [`FundamentalMatrix`]
//! is always stored canonicalized: unit Frobenius norm, and the global sign
//! chosen so the entry of largest magnitude is positive.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Errors from the geometry primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// An epipolar line came out with (a, b) = (0, 0); the source point maps
    /// to the line at infinity (it is an epipole).
    #[error("degenerate epipolar line: (a, b) = (0, 0)")]
    DegenerateLine,
    /// A zero (or non-finite) matrix was supplied where a nonzero one is required.
    #[error("matrix is zero or non-finite")]
    SingularInput,
    /// Malformed fundamental-matrix text.
    #[error("fundamental matrix text, line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// A 2-D image point in homogeneous coordinates. Match points have `w = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint2 {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl HomogeneousPoint2 {
    /// An affine image point (w = 1).
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, w: 1.0 }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.w)
    }
}

/// A 2-D line `a x + b y + c = 0`. Lines handed to callers always have
/// (a, b) != (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// A correspondence between the two images; both points have `w = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub left: HomogeneousPoint2,
    pub right: HomogeneousPoint2,
}

impl MatchPair {
    pub fn new(x: f64, y: f64, x_prime: f64, y_prime: f64) -> Self {
        Self {
            left: HomogeneousPoint2::new(x, y),
            right: HomogeneousPoint2::new(x_prime, y_prime),
        }
    }

    /// Swapped view of the pair (right becomes left).
    pub fn swapped(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
        }
    }
}

/// Which image an epipolar line is transferred into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `l' = F m`: line in the right image of a left-image point.
    LeftToRight,
    /// `l = F^T m'`: line in the left image of a right-image point.
    RightToLeft,
}

/// A 3x3 fundamental matrix held in canonical form: unit Frobenius norm,
/// sign fixed so the largest-magnitude entry is positive. Construct via
/// [`FundamentalMatrix::canonicalize`] or [`FundamentalMatrix::enforce_rank2`];
/// the latter also projects to the nearest rank-2 matrix.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    m: Matrix3<f64>,
}

impl FundamentalMatrix {
    /// Scale-and-sign canonicalization: divide by the Frobenius norm, then
    /// flip the global sign if needed. Sign rule: scan entries in row-major
    /// order and take the first whose magnitude is within a relative 1e-9 of
    /// the maximum; the canonical matrix has that entry positive. The window
    /// keeps the rule stable when two entries tie up to rounding.
    pub fn canonicalize(m: &Matrix3<f64>) -> Result<Self, GeometryError> {
        let norm = m.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(GeometryError::SingularInput);
        }
        // Already-unit-norm input stays bit-identical (text round trips).
        let mut scaled = if (norm - 1.0).abs() <= 1e-12 {
            *m
        } else {
            m / norm
        };
        let mut max_abs = 0.0_f64;
        for r in 0..3 {
            for c in 0..3 {
                max_abs = max_abs.max(scaled[(r, c)].abs());
            }
        }
        let cutoff = max_abs * (1.0 - 1e-9);
        'scan: for r in 0..3 {
            for c in 0..3 {
                if scaled[(r, c)].abs() >= cutoff {
                    if scaled[(r, c)] < 0.0 {
                        scaled = -scaled;
                    }
                    break 'scan;
                }
            }
        }
        // Sign flips leave negative zeros behind; normalize them so text
        // output never prints "-0".
        for r in 0..3 {
            for c in 0..3 {
                if scaled[(r, c)] == 0.0 {
                    scaled[(r, c)] = 0.0;
                }
            }
        }
        Ok(Self { m: scaled })
    }

    /// Project to the nearest rank-2 matrix in Frobenius norm (zero the
    /// smallest singular value), then canonicalize.
    pub fn enforce_rank2(m: &Matrix3<f64>) -> Result<Self, GeometryError> {
        let norm = m.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(GeometryError::SingularInput);
        }
        let svd = m.svd(true, true);
        let u = svd.u.ok_or(GeometryError::SingularInput)?;
        let v_t = svd.v_t.ok_or(GeometryError::SingularInput)?;
        let mut sigma = svd.singular_values;
        let mut min_idx = 0;
        for i in 1..3 {
            if sigma[i] < sigma[min_idx] {
                min_idx = i;
            }
        }
        sigma[min_idx] = 0.0;
        let rank2 = u * Matrix3::from_diagonal(&sigma) * v_t;
        Self::canonicalize(&rank2)
    }

    pub fn as_matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix3<f64> {
        self.m
    }

    /// Largest absolute entrywise difference to another canonical matrix.
    pub fn max_abs_diff(&self, other: &FundamentalMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((self.m[(r, c)] - other.m[(r, c)]).abs());
            }
        }
        worst
    }

    /// Serialize in the shared text format: a `# format: fmatrix v1` header
    /// followed by three lines of three whitespace-separated floats
    /// (row-major, shortest round-trip representation).
    pub fn to_text(&self) -> String {
        let mut out = String::from("# format: fmatrix v1\n");
        for r in 0..3 {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.m[(r, 0)],
                self.m[(r, 1)],
                self.m[(r, 2)]
            );
        }
        out
    }

    /// Parse the text format produced by [`Self::to_text`]. Lines starting
    /// with '#' and blank lines are ignored; exactly three data rows of three
    /// floats are required. The parsed matrix is canonicalized.
    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut rows: Vec<[f64; 3]> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            last_line = line_no;
            if rows.len() == 3 {
                return Err(GeometryError::Format {
                    line: line_no,
                    reason: "expected exactly 3 data rows, found more".into(),
                });
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(GeometryError::Format {
                    line: line_no,
                    reason: format!("expected 3 values, found {}", fields.len()),
                });
            }
            let mut row = [0.0; 3];
            for (k, field) in fields.iter().enumerate() {
                row[k] = field.parse::<f64>().map_err(|_| GeometryError::Format {
                    line: line_no,
                    reason: format!("invalid float {field:?}"),
                })?;
            }
            rows.push(row);
        }
        if rows.len() != 3 {
            return Err(GeometryError::Format {
                line: last_line + 1,
                reason: format!("expected 3 data rows, found {}", rows.len()),
            });
        }
        let m = Matrix3::new(
            rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0],
            rows[2][1], rows[2][2],
        );
        Self::canonicalize(&m)
    }
}

/// The signed algebraic epipolar residual `m'^T F m`.
pub fn epipolar_residual(f: &Matrix3<f64>, pair: &MatchPair) -> f64 {
    pair.right.to_vector().dot(&(f * pair.left.to_vector()))
}

/// Transfer a point into the other image's epipolar line.
pub fn epipolar_line(
    f: &Matrix3<f64>,
    point: &HomogeneousPoint2,
    side: Side,
) -> Result<Line2, GeometryError> {
    let v = match side {
        Side::LeftToRight => f * point.to_vector(),
        Side::RightToLeft => f.transpose() * point.to_vector(),
    };
    let line = Line2 {
        a: v.x,
        b: v.y,
        c: v.z,
    };
    if line.a == 0.0 && line.b == 0.0 {
        return Err(GeometryError::DegenerateLine);
    }
    Ok(line)
}

/// Perpendicular distance from an affine point (w = 1) to a line, in pixels.
pub fn point_line_distance(line: &Line2, p: &HomogeneousPoint2) -> Result<f64, GeometryError> {
    if line.a == 0.0 && line.b == 0.0 {
        return Err(GeometryError::DegenerateLine);
    }
    let num = (line.a * p.x + line.b * p.y + line.c * p.w).abs();
    Ok(num / line.a.hypot(line.b))
}

/// Mean of the two point-to-epipolar-line distances of a pair:
/// `(d(m', F m) + d(m, F^T m')) / 2`.
pub fn symmetric_epipolar_distance(
    f: &Matrix3<f64>,
    pair: &MatchPair,
) -> Result<f64, GeometryError> {
    let l_right = epipolar_line(f, &pair.left, Side::LeftToRight)?;
    let l_left = epipolar_line(f, &pair.right, Side::RightToLeft)?;
    let d_right = point_line_distance(&l_right, &pair.right)?;
    let d_left = point_line_distance(&l_left, &pair.left)?;
    Ok(0.5 * (d_right + d_left))
}
