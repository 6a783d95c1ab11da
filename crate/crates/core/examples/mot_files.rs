//! Read MOT-format detections, a camera file and seqinfo.ini, track, and print
//! the output in MOT format.
//!
//! `cargo run --example mot_files -- [det.txt camera.txt seqinfo.ini]`

use std::path::PathBuf;

use ucmc::io;
use ucmc::tracker::{run_sequence, TrackerConfig};

fn main() -> ucmc::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mot_small");
    let (det, cam, info) = match args.as_slice() {
        [d, c, s] => (d.clone(), c.clone(), s.clone()),
        _ => (fixture.join("det.txt"), fixture.join("camera.txt"), fixture.join("seqinfo.ini")),
    };

    let camera = io::parse_camera(&cam)?;
    let detections = io::parse_detections(&det)?;
    let info = io::parse_seqinfo(&info)?;
    let config = TrackerConfig {
        fps: info.fps,
        ..TrackerConfig::default()
    };
    let (outputs, stats) = run_sequence(&detections, &camera, &config, info.length)?;
    print!("{}", io::format_tracks(&outputs));
    eprintln!(
        "{} frames, {} tracks, {} detections dropped",
        stats.frames,
        stats.tracks_created,
        stats.dropped_detections()
    );
    Ok(())
}
