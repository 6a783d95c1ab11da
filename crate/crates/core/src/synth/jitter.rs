use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::CameraExtrinsics;

/// Camera shake as white angular acceleration, in rad/frame².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JitterSpec {
    /// About the camera's horizontal axis.
    pub tilt_std: f64,
    /// About the world vertical axis.
    pub yaw_std: f64,
}

impl JitterSpec {
    pub fn new(tilt_std: f64, yaw_std: f64) -> Self {
        Self { tilt_std, yaw_std }
    }

    pub fn is_zero(&self) -> bool {
        self.tilt_std == 0.0 && self.yaw_std == 0.0
    }
}

/// Angular offset and rate accumulated by the jitter process.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JitterState {
    pub tilt: f64,
    pub yaw: f64,
    pub tilt_rate: f64,
    pub yaw_rate: f64,
    pub frame: u32,
}

impl JitterState {
    /// Integrates one frame of acceleration noise:
    /// `angle += rate + a/2`, `rate += a` with a one-frame step.
    pub fn advance<R: Rng + ?Sized>(&mut self, spec: &JitterSpec, rng: &mut R) {
        let a_tilt = sample(spec.tilt_std, rng);
        let a_yaw = sample(spec.yaw_std, rng);
        self.tilt += self.tilt_rate + 0.5 * a_tilt;
        self.yaw += self.yaw_rate + 0.5 * a_yaw;
        self.tilt_rate += a_tilt;
        self.yaw_rate += a_yaw;
        self.frame += 1;
    }

    /// Nominal pose rotated about its own center by the current offsets.
    pub fn perturb(&self, nominal: &CameraExtrinsics) -> CameraExtrinsics {
        let center = nominal.center();
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), -self.yaw);
        let tilt = Rotation3::from_axis_angle(&Vector3::x_axis(), self.tilt);
        let rotation: Matrix3<f64> = tilt.matrix() * nominal.rotation * yaw.matrix();
        CameraExtrinsics::from_center(rotation, center)
    }
}

fn sample<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    if std > 0.0 {
        Normal::new(0.0, std).map(|n| n.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// Advances the jitter process by one frame and returns the rendering pose.
pub fn apply_jitter<R: Rng + ?Sized>(
    nominal: &CameraExtrinsics,
    spec: &JitterSpec,
    state: &mut JitterState,
    rng: &mut R,
) -> CameraExtrinsics {
    if spec.is_zero() {
        state.frame += 1;
        return *nominal;
    }
    state.advance(spec, rng);
    state.perturb(nominal)
}
