use std::path::PathBuf;

use ucmc::io::{format_tracks, parse_camera, parse_detections, parse_records, parse_seqinfo};
use ucmc::synth::{evaluate, generate, outputs_to_records, Scenario};
use ucmc::tracker::{run_sequence, TrackerConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/mot_small").join(name)
}

#[test]
fn mot_fixture_matches_golden_output() {
    let cam = parse_camera(fixture("camera.txt")).unwrap();
    let dets = parse_detections(fixture("det.txt")).unwrap();
    let info = parse_seqinfo(fixture("seqinfo.ini")).unwrap();
    let cfg = TrackerConfig { fps: info.fps, ..TrackerConfig::default() };
    let (out, stats) = run_sequence(&dets, &cam, &cfg, info.length).unwrap();
    assert_eq!(stats.frames, 20);
    assert_eq!(stats.tracks_created, 2);

    let golden = std::fs::read_to_string(fixture("tracks_golden.txt")).unwrap();
    assert_eq!(format_tracks(&out), golden);

    let gt = parse_records(fixture("gt.txt")).unwrap();
    let report = evaluate(&outputs_to_records(&out), &gt, &cam, 1.0);
    assert_eq!(report.id_switches, 0);
    assert_eq!(report.idf1, 1.0);
}

#[test]
fn default_scenario_end_to_end() {
    let sc = Scenario::default();
    for seed in 0..5 {
        let seq = generate(&sc, seed).unwrap();
        let (out, _) = run_sequence(&seq.detections, &sc.camera, &TrackerConfig::default(), Some(sc.frames)).unwrap();
        let r = evaluate(&outputs_to_records(&out), &seq.ground_truth, &sc.camera, 1.0);
        assert!(r.idf1 >= 0.95, "seed {seed}: {r:?}");
    }
}

#[test]
fn parallel_cost_rows_do_not_change_output() {
    let sc = Scenario::default();
    let seq = generate(&sc, 3).unwrap();
    let serial = TrackerConfig::default();
    let parallel = TrackerConfig { parallel: true, ..serial };
    let a = run_sequence(&seq.detections, &sc.camera, &serial, None).unwrap().0;
    let b = run_sequence(&seq.detections, &sc.camera, &parallel, None).unwrap().0;
    assert_eq!(format_tracks(&a), format_tracks(&b));
}
