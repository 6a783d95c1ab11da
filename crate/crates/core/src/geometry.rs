//! Linear camera model and image/ground-plane mapping.
//!
//! A pinhole camera with intrinsics `K` and world-to-camera pose `[R | T]`
//! induces a 3×3 homography `A` between homogeneous ground coordinates on the
//! plane `z = z0` and homogeneous pixel coordinates:
//!
//! ```text
//! gamma * [u, v, 1]^T = A * [x, y, 1]^T
//! ```
//!
//! `gamma` is the depth of the point along the optical axis. Detections are
//! mapped to the ground through `A^-1`, and their pixel noise is pushed
//! through the Jacobian of that mapping to obtain a correlated ground-plane
//! covariance.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Tolerance used when validating that a rotation matrix is orthonormal.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Threshold on `|det A|` after scaling `A` by its largest absolute entry.
pub const SINGULAR_DET_THRESHOLD: f64 = 1e-12;

/// Threshold on the homogeneous scale below which a point is at infinity.
pub const HORIZON_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub u0: f64,
    pub v0: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, u0: f64, v0: f64) -> Self {
        Self { fx, fy, u0, v0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.u0.is_finite() && self.v0.is_finite()) {
            return Err(Error::InvalidConfig("principal point must be finite".into()));
        }
        Ok(())
    }

    /// Upper-left 3×3 block of the intrinsic matrix.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, 0.0, self.u0, //
            0.0, self.fy, self.v0, //
            0.0, 0.0, 1.0,
        )
    }
}

/// World-to-camera rigid transform: `p_cam = R * p_world + T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraExtrinsics {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl CameraExtrinsics {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    /// Camera mounted at `(0, 0, height)` above a ground plane with `z` up,
    /// looking along world `+y` and pitched down by `tilt` radians.
    ///
    /// Image `u` grows along world `+x`, image `v` grows downwards.
    pub fn looking_down(height: f64, tilt: f64) -> Self {
        let (s, c) = tilt.sin_cos();
        // rows are the camera axes expressed in world coordinates
        let rotation = Matrix3::new(
            1.0, 0.0, 0.0, //
            0.0, -s, -c, //
            0.0, c, -s,
        );
        let center = Vector3::new(0.0, 0.0, height);
        Self::from_center(rotation, center)
    }

    /// Builds extrinsics from a rotation and the camera center in world coordinates.
    pub fn from_center(rotation: Matrix3<f64>, center: Vector3<f64>) -> Self {
        Self::new(rotation, -(rotation * center))
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        if r.iter().any(|v| !v.is_finite()) || self.translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRotation("non-finite entries".into()));
        }
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > ROTATION_TOLERANCE {
            return Err(Error::InvalidRotation(format!(
                "R^T R deviates from identity by {err:e}"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidRotation(format!("det R = {det}")));
        }
        Ok(())
    }
}

/// Pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
}

impl ImagePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// A back-projected pixel on the ground plane, with the recovered depth scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
}

impl GroundPoint {
    pub fn xy(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

/// Ground-plane position of a detection together with its covariance `R_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundMeasurement {
    pub position: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

impl GroundMeasurement {
    pub fn new(position: Vector2<f64>, covariance: Matrix2<f64>) -> Self {
        Self {
            position,
            covariance,
        }
    }
}

/// The plane-induced homography `A` and its cached inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix {
    a: Matrix3<f64>,
    a_inv: Matrix3<f64>,
    z0: f64,
}

impl ProjectionMatrix {
    /// Wraps an arbitrary ground-to-image homography.
    pub fn from_matrix(a: Matrix3<f64>, z0: f64) -> Result<Self> {
        let a_inv = invert_3x3(&a)?;
        Ok(Self { a, a_inv, z0 })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.a
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.a_inv
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Back-projects a pixel onto the ground plane.
    pub fn image_to_ground(&self, p: ImagePoint) -> Result<GroundPoint> {
        let b = self.a_inv * Vector3::new(p.u, p.v, 1.0);
        if b.z.abs() < HORIZON_THRESHOLD {
            return Err(Error::PointAtInfinity { scale: b.z });
        }
        Ok(GroundPoint {
            x: b.x / b.z,
            y: b.y / b.z,
            gamma: 1.0 / b.z,
        })
    }

    /// Projects a ground point into the image.
    ///
    /// Points behind the camera still yield the algebraic result; use
    /// [`ProjectionMatrix::project`] when visibility matters.
    pub fn ground_to_image(&self, x: f64, y: f64) -> Result<ImagePoint> {
        self.project(x, y).map(|(p, _)| p)
    }

    /// Projects a ground point and also returns its depth (`gamma`), which
    /// is negative for points behind the camera.
    pub fn project(&self, x: f64, y: f64) -> Result<(ImagePoint, f64)> {
        let w = self.a * Vector3::new(x, y, 1.0);
        if w.z.abs() < HORIZON_THRESHOLD {
            return Err(Error::PointAtInfinity { scale: w.z });
        }
        Ok((ImagePoint::new(w.x / w.z, w.y / w.z), w.z))
    }

    /// Analytic Jacobian `d(x, y) / d(u, v)` of [`image_to_ground`] at `g`.
    ///
    /// [`image_to_ground`]: ProjectionMatrix::image_to_ground
    pub fn ground_jacobian(&self, g: &GroundPoint) -> Matrix2<f64> {
        let a = &self.a_inv;
        let gamma = g.gamma;
        Matrix2::new(
            gamma * a[(0, 0)] - a[(2, 0)] * gamma * g.x,
            gamma * a[(0, 1)] - a[(2, 1)] * gamma * g.x,
            gamma * a[(1, 0)] - a[(2, 0)] * gamma * g.y,
            gamma * a[(1, 1)] - a[(2, 1)] * gamma * g.y,
        )
    }

    /// Maps a bottom-center pixel and its box size to a ground measurement
    /// with correlated covariance `C * R_uv * C^T`.
    pub fn map_measurement(
        &self,
        p: ImagePoint,
        box_size: (f64, f64),
        sigma_m: f64,
    ) -> Result<GroundMeasurement> {
        let r_uv = pixel_noise_cov(box_size.0, box_size.1, sigma_m)?;
        let g = self.image_to_ground(p)?;
        let c = self.ground_jacobian(&g);
        let r = c * r_uv * c.transpose();
        Ok(GroundMeasurement::new(g.xy(), symmetrize2(&r)))
    }
}

/// Builds the ground-plane homography from camera parameters.
///
/// Columns one and two of `K_i * K_o` are kept, and the third column is
/// `theta_3 * z0 + theta_4`, i.e. the plane `z = z0` is folded into the
/// translation.
pub fn build_projection(
    intr: &CameraIntrinsics,
    extr: &CameraExtrinsics,
    z0: f64,
) -> Result<ProjectionMatrix> {
    intr.validate()?;
    extr.validate()?;
    let k = intr.matrix();
    let r = &extr.rotation;
    let third = r.column(2) * z0 + extr.translation;
    let rt = Matrix3::from_columns(&[r.column(0).into_owned(), r.column(1).into_owned(), third]);
    ProjectionMatrix::from_matrix(k * rt, z0)
}

/// Image-plane covariance of the bottom-center point: `diag((s*w)^2, (s*h)^2)`.
pub fn pixel_noise_cov(width: f64, height: f64, sigma_m: f64) -> Result<Matrix2<f64>> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(Error::InvalidDimension { width, height });
    }
    if !(sigma_m > 0.0) || !sigma_m.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "detection noise factor must be positive, got {sigma_m}"
        )));
    }
    let sw = sigma_m * width;
    let sh = sigma_m * height;
    Ok(Matrix2::new(sw * sw, 0.0, 0.0, sh * sh))
}

pub(crate) fn symmetrize2(m: &Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

/// Adjugate / determinant inverse with a scale-invariant singularity check.
fn invert_3x3(a: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let scale = a.abs().max();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::SingularProjection { det: 0.0 });
    }
    let n = a / scale;
    let det_n = n.determinant();
    if det_n.abs() < SINGULAR_DET_THRESHOLD {
        return Err(Error::SingularProjection { det: det_n });
    }
    let m = |r: usize, c: usize| a[(r, c)];
    let cof = Matrix3::new(
        m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1),
        -(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)),
        m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0),
        -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1)),
        m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0),
        -(m(0, 0) * m(2, 1) - m(0, 1) * m(2, 0)),
        m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1),
        -(m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0)),
        m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
    );
    let det = m(0, 0) * cof[(0, 0)] + m(0, 1) * cof[(0, 1)] + m(0, 2) * cof[(0, 2)];
    Ok(cof.transpose() / det)
}

/// A calibrated camera observing the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub intrinsics: CameraIntrinsics,
    pub extrinsics: CameraExtrinsics,
    pub z0: f64,
    projection: ProjectionMatrix,
}

impl CameraModel {
    pub fn new(intrinsics: CameraIntrinsics, extrinsics: CameraExtrinsics, z0: f64) -> Result<Self> {
        let projection = build_projection(&intrinsics, &extrinsics, z0)?;
        Ok(Self {
            intrinsics,
            extrinsics,
            z0,
            projection,
        })
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    /// Same intrinsics and ground plane, different pose.
    pub fn with_extrinsics(&self, extrinsics: CameraExtrinsics) -> Result<Self> {
        Self::new(self.intrinsics, extrinsics, self.z0)
    }
}
