//! Constant-velocity Kalman filter on the ground plane.
//!
//! State ordering is `[x, vx, y, vy]` (meters, meters per second).

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::geometry::GroundMeasurement;

/// Innovation covariances with a determinant below this are treated as singular.
pub const MIN_INNOVATION_DET: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl KalmanState {
    pub fn new(mean: Vector4<f64>, covariance: Matrix4<f64>) -> Self {
        Self { mean, covariance }
    }

    /// Starts a track at a measured position with zero velocity.
    ///
    /// Position variances come from the measurement covariance diagonal,
    /// velocity variances from `velocity_std`.
    pub fn initiate(z: &GroundMeasurement, velocity_std: f64) -> Self {
        let vv = velocity_std * velocity_std;
        Self {
            mean: Vector4::new(z.position.x, 0.0, z.position.y, 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(
                z.covariance[(0, 0)],
                vv,
                z.covariance[(1, 1)],
                vv,
            )),
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.mean[0], self.mean[2])
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.mean[1], self.mean[3])
    }
}

/// Process compensation factors and the frame interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoiseParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub dt: f64,
}

impl ProcessNoiseParams {
    pub fn new(sigma_x: f64, sigma_y: f64, dt: f64) -> Result<Self> {
        if !(sigma_x >= 0.0 && sigma_y >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "compensation factors must be non-negative, got ({sigma_x}, {sigma_y})"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            sigma_x,
            sigma_y,
            dt,
        })
    }
}

#[rustfmt::skip]
pub fn transition_matrix(dt: f64) -> Matrix4<f64> {
    Matrix4::new(
        1.0, dt,  0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, dt,
        0.0, 0.0, 0.0, 1.0,
    )
}

#[rustfmt::skip]
pub fn observation_matrix() -> Matrix2x4<f64> {
    Matrix2x4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    )
}

/// Noise gain mapping a per-axis acceleration into position and velocity change.
#[rustfmt::skip]
pub fn noise_gain(dt: f64) -> Matrix4x2<f64> {
    let half = 0.5 * dt * dt;
    Matrix4x2::new(
        half, 0.0,
        dt,   0.0,
        0.0,  half,
        0.0,  dt,
    )
}

/// `Q = G * diag(sigma_x, sigma_y) * G^T`.
pub fn process_noise(params: &ProcessNoiseParams) -> Matrix4<f64> {
    let g = noise_gain(params.dt);
    let d = Matrix2::new(params.sigma_x, 0.0, 0.0, params.sigma_y);
    symmetrize4(&(g * d * g.transpose()))
}

pub fn predict(s: &KalmanState, params: &ProcessNoiseParams) -> KalmanState {
    let f = transition_matrix(params.dt);
    let p = f * s.covariance * f.transpose() + process_noise(params);
    KalmanState {
        mean: f * s.mean,
        covariance: symmetrize4(&p),
    }
}

pub fn update(s: &KalmanState, z: &GroundMeasurement) -> Result<KalmanState> {
    let h = observation_matrix();
    let innovation = innovation_cov(s, z);
    let inv = invert_spd2(&innovation)?;
    let gain = s.covariance * h.transpose() * inv;
    let residual = z.position - h * s.mean;
    let p = (Matrix4::identity() - gain * h) * s.covariance;
    Ok(KalmanState {
        mean: s.mean + gain * residual,
        covariance: symmetrize4(&p),
    })
}

/// `S = H P H^T + R_k`.
pub fn innovation_cov(s: &KalmanState, z: &GroundMeasurement) -> Matrix2<f64> {
    let p = &s.covariance;
    // H P H^T picks the position block of P
    let hph = Matrix2::new(p[(0, 0)], p[(0, 2)], p[(2, 0)], p[(2, 2)]);
    let s = hph + z.covariance;
    (s + s.transpose()) * 0.5
}

pub(crate) fn invert_spd2(s: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    if !(det > MIN_INNOVATION_DET) || !det.is_finite() {
        return Err(Error::DegenerateInnovation { det });
    }
    Ok(Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]) / det)
}

fn symmetrize4(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}
