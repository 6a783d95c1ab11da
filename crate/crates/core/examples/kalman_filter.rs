//! Constant-velocity filtering on the ground plane with process noise sized
//! for camera motion.

use nalgebra::{Matrix2, Vector2};
use ucmc::geometry::GroundMeasurement;
use ucmc::kalman::{predict, update, KalmanState, ProcessNoiseParams};

fn main() -> ucmc::Result<()> {
    let fps = 30.0;
    let params = ProcessNoiseParams::new(5.0, 5.0, 1.0 / fps)?;
    let start = Vector2::new(-2.0, 15.0);
    let velocity = Vector2::new(1.2, 0.4);
    let r = Matrix2::new(0.02, 0.01, 0.01, 0.2);

    let mut state = KalmanState::initiate(&GroundMeasurement::new(start, r), 5.0);
    for k in 1..=60 {
        state = predict(&state, &params);
        let truth = start + velocity * (k as f64 / fps);
        // deterministic wobble standing in for detector noise
        let wobble = Vector2::new(0.05 * (k as f64 * 1.3).sin(), 0.2 * (k as f64 * 0.7).cos());
        state = update(&state, &GroundMeasurement::new(truth + wobble, r))?;
        if k % 15 == 0 {
            let v = state.velocity();
            println!(
                "frame {k:2}: position ({:.2}, {:.2}) velocity ({:.2}, {:.2}) m/s, pos std {:.3} m",
                state.position().x,
                state.position().y,
                v.x,
                v.y,
                state.covariance[(0, 0)].sqrt()
            );
        }
    }
    Ok(())
}
