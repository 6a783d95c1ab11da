use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;

use ucmc::geometry::GroundMeasurement;
use ucmc::kalman::{predict, update, KalmanState, ProcessNoiseParams};

fn spd(angle: f64, l1: f64, l2: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    let r = Matrix2::new(c, -s, s, c);
    let m = r * Matrix2::from_diagonal(&Vector2::new(l1, l2)) * r.transpose();
    (m + m.transpose()) * 0.5
}

proptest! {
    #[test]
    fn covariance_stays_psd(
        sx in 0.001..50.0f64,
        sy in 0.001..50.0f64,
        fps in 1.0..60.0f64,
        steps in prop::collection::vec((0.0..3.2f64, 1e-4..10.0f64, 1e-4..10.0f64, -3.0..3.0f64, -3.0..3.0f64, any::<bool>()), 1..30),
    ) {
        let params = ProcessNoiseParams::new(sx, sy, 1.0 / fps).unwrap();
        let mut s = KalmanState::initiate(&GroundMeasurement::new(Vector2::new(0.0, 10.0), spd(0.3, 0.1, 1.0)), 5.0);
        for (a, l1, l2, dx, dy, observe) in steps {
            s = predict(&s, &params);
            if observe {
                let z = GroundMeasurement::new(s.position() + Vector2::new(dx, dy), spd(a, l1, l2));
                s = update(&s, &z).unwrap();
            }
            prop_assert_eq!(s.covariance, s.covariance.transpose());
            let min = s.covariance.symmetric_eigen().eigenvalues.min();
            prop_assert!(min >= -1e-9, "eigenvalue {min}");
        }
    }
}

#[test]
fn noiseless_constant_velocity_converges() {
    for fps in [10.0, 30.0] {
        let dt = 1.0 / fps;
        let params = ProcessNoiseParams::new(5.0, 5.0, dt).unwrap();
        let (p0, v) = (Vector2::new(-3.0, 12.0), Vector2::new(0.8, 1.1));
        let r = Matrix2::new(0.01, 0.004, 0.004, 0.05);
        let mut s = KalmanState::initiate(&GroundMeasurement::new(p0, r), 5.0);
        for k in 1..=150 {
            s = predict(&s, &params);
            s = update(&s, &GroundMeasurement::new(p0 + v * (k as f64 * dt), r)).unwrap();
        }
        assert!((s.position() - (p0 + v * (150.0 * dt))).norm() < 1e-6);
        assert!((s.velocity() - v).norm() < 1e-4, "fps {fps}: {:?}", s.velocity());
    }
}
