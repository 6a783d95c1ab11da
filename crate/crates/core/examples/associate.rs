//! Build an MMD cost matrix between predicted tracks and mapped detections,
//! then solve the gated assignment.

use nalgebra::{Matrix4, Vector4};
use ucmc::association::{build_cost_matrix, solve_assignment, DEFAULT_GATE};
use ucmc::geometry::ImagePoint;
use ucmc::kalman::KalmanState;
use ucmc::synth::default_camera;

fn main() -> ucmc::Result<()> {
    let camera = default_camera();
    let projection = camera.projection();
    let tracks: Vec<KalmanState> = [(-1.5, 14.0), (1.5, 14.5), (0.0, 24.0)]
        .iter()
        .map(|&(x, y)| KalmanState::new(Vector4::new(x, 0.0, y, 0.0), Matrix4::identity() * 0.3))
        .collect();

    // detections near tracks 1 and 0, plus one clutter box far away
    let mut measurements = Vec::new();
    for (x, y) in [(1.6, 14.4), (-1.4, 14.1), (8.0, 40.0)] {
        let (p, depth) = projection.project(x, y)?;
        let size = (500.0 / depth, 1700.0 / depth);
        measurements.push(projection.map_measurement(ImagePoint::new(p.u, p.v), size, 0.05)?);
    }

    let costs = build_cost_matrix(&tracks, &measurements, DEFAULT_GATE, false);
    for i in 0..costs.rows() {
        let row: Vec<String> = (0..costs.cols())
            .map(|j| costs.get(i, j).map_or("   -   ".into(), |c| format!("{c:7.2}")))
            .collect();
        println!("track {i}: {}", row.join(" "));
    }
    let result = solve_assignment(&costs);
    println!("matches {:?}", result.matches);
    println!("unmatched tracks {:?}, detections {:?}", result.unmatched_tracks, result.unmatched_dets);
    Ok(())
}
