//! Frames per second on 1000 frames with 10 targets, parsing excluded.
//! Run with `--release`.

use ucmc::cli::bench_fps;
use ucmc::synth::{generate, Scenario, TargetSpec};
use ucmc::tracker::TrackerConfig;

fn main() -> ucmc::Result<()> {
    let targets = (0..10)
        .map(|i| TargetSpec {
            position: [-9.0 + 2.0 * f64::from(i), 14.0 + f64::from(i % 3) * 4.0],
            velocity: [0.0, 0.05],
        })
        .collect();
    let scenario = Scenario {
        targets,
        random_targets: None,
        frames: 1000,
        ..Scenario::default()
    };
    let seq = generate(&scenario, 1)?;
    let detections: usize = seq.detections.values().map(Vec::len).sum();
    let fps = bench_fps(&seq.detections, &scenario.camera, &TrackerConfig::default(), None, 7)?;
    println!("{detections} detections over {} frames", scenario.frames);
    println!("fps_median={fps:.0}");
    Ok(())
}
