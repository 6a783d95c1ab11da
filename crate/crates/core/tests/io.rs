use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucmc::error::Error;
use ucmc::io::{
    format_camera, format_detections, format_identity_records, group_detections, parse_camera_str,
    parse_records_str, DetFileRecord,
};
use ucmc::synth::default_camera;

fn random_records(rng: &mut ChaCha8Rng, n: usize) -> Vec<DetFileRecord> {
    let mut recs: Vec<DetFileRecord> = (0..n)
        .map(|_| DetFileRecord {
            frame: rng.random_range(1..200),
            id: rng.random_range(1..40),
            bb_left: rng.random_range(-5000..200_000) as f64 / 100.0,
            bb_top: rng.random_range(-5000..100_000) as f64 / 100.0,
            bb_width: rng.random_range(1..30_000) as f64 / 100.0,
            bb_height: rng.random_range(1..60_000) as f64 / 100.0,
            conf: 1.0,
        })
        .collect();
    recs.sort_by_key(|r| (r.frame, r.id));
    recs
}

#[test]
fn thousand_line_file_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let recs = random_records(&mut rng, 1000);
    let text = format_identity_records(&recs);
    assert_eq!(text.lines().count(), 1000);
    let parsed = parse_records_str(&text, Path::new("gen.txt")).unwrap();
    assert_eq!(parsed, recs);
    assert_eq!(format_identity_records(&parsed), text);
}

#[test]
fn detection_write_parse_write_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let text = format_detections(&group_detections(&random_records(&mut rng, 300)));
    let again = format_detections(&group_detections(&parse_records_str(&text, Path::new("d")).unwrap()));
    assert_eq!(again, text);
}

#[test]
fn camera_round_trip_is_exact() {
    let cam = default_camera();
    let text = format_camera(&cam);
    let back = parse_camera_str(&text, Path::new("cam.txt")).unwrap();
    assert_eq!(back.projection().matrix(), cam.projection().matrix());
    assert_eq!(format_camera(&back), text);
}

fn mutate(rng: &mut ChaCha8Rng, line: &str) -> String {
    let mut fields: Vec<String> = line.split(',').map(str::to_string).collect();
    match rng.random_range(0..9) {
        0 => {
            fields.pop();
        }
        1 => fields.push("0".into()),
        2 => {
            let i = rng.random_range(2..7);
            fields[i] = "abc".into();
        }
        3 => {
            let i = rng.random_range(2..7);
            fields[i] = ["nan", "inf", "-inf"][rng.random_range(0..3)].into();
        }
        4 => fields[0] = "0".into(),
        5 => fields[0] = "-3".into(),
        6 => fields[1] = "1.5".into(),
        7 => {
            let i = rng.random_range(0..10);
            fields[i] = String::new();
        }
        _ => return fields.join(";"),
    }
    fields.join(",")
}

#[test]
fn fuzzed_malformed_lines_are_rejected_with_line_numbers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let recs = random_records(&mut rng, 20);
        let mut lines: Vec<String> = format_identity_records(&recs).lines().map(str::to_string).collect();
        let bad = rng.random_range(0..lines.len());
        lines[bad] = mutate(&mut rng, &lines[bad]);
        match parse_records_str(&lines.join("\n"), Path::new("fuzz.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, bad + 1, "{}", lines[bad]),
            other => panic!("accepted `{}`: {other:?}", lines[bad]),
        }
    }
}
