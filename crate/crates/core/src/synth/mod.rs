//! Synthetic scenes for verifying the tracker without benchmark data.
//!
//! Targets move at constant velocity on the ground plane and are rendered
//! through a camera whose pose may be shaken by [`JitterSpec`]. Only the
//! rendering camera is shaken; the tracker always receives the nominal one.

mod baseline;
mod eval;
mod jitter;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{CameraExtrinsics, CameraIntrinsics, CameraModel};
use crate::io::{labeled_rows, CameraRows, DetFileRecord};
use crate::tracker::{Detection, DetectionSet};

pub use baseline::{iou, run_iou_baseline, IouTracker, IOU_GATE};
pub use eval::{evaluate, outputs_to_records, EvalReport, DEFAULT_MATCH_THRESHOLD};
pub use jitter::{apply_jitter, JitterSpec, JitterState};

/// Layout attempts before giving up on the visibility requirement.
pub const MAX_LAYOUT_ATTEMPTS: usize = 100;

/// Minimum fraction of frames in which every target must be in view.
pub const MIN_VISIBLE_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    /// Ground position at the first frame (m).
    pub position: [f64; 2],
    /// Ground velocity (m/s).
    pub velocity: [f64; 2],
}

impl TargetSpec {
    pub fn at(&self, t: f64) -> [f64; 2] {
        [
            self.position[0] + self.velocity[0] * t,
            self.position[1] + self.velocity[1] * t,
        ]
    }
}

/// Randomly placed targets, redrawn until the layout is valid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTargets {
    pub count: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub max_speed: f64,
    /// Minimum ground distance between any two targets over the whole sequence.
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub targets: Vec<TargetSpec>,
    pub random_targets: Option<RandomTargets>,
    pub frames: u32,
    pub fps: f64,
    pub camera: CameraModel,
    pub image_size: (f64, f64),
    /// Box `(width, height)` in pixels at `reference_depth` meters.
    pub box_size: (f64, f64),
    pub reference_depth: f64,
    /// Pixel noise factor applied to the bottom-center point.
    pub noise: f64,
    pub jitter: JitterSpec,
    pub confidence: f64,
}

/// A 1920×1080 camera eight meters up, pitched 20 degrees down.
pub fn default_camera() -> CameraModel {
    CameraModel::new(
        CameraIntrinsics::new(1000.0, 1000.0, 960.0, 540.0),
        CameraExtrinsics::looking_down(8.0, 20f64.to_radians()),
        0.0,
    )
    .expect("default camera is valid")
}

impl Default for Scenario {
    /// Three pedestrians at walking speed, 100 frames at 30 fps, no jitter.
    fn default() -> Self {
        Self {
            targets: Vec::new(),
            random_targets: Some(RandomTargets {
                count: 3,
                x_range: (-6.0, 6.0),
                y_range: (12.0, 26.0),
                max_speed: 1.5,
                min_separation: 3.0,
            }),
            frames: 100,
            fps: 30.0,
            camera: default_camera(),
            image_size: (1920.0, 1080.0),
            box_size: (50.0, 170.0),
            reference_depth: 10.0,
            noise: 0.05,
            jitter: JitterSpec::default(),
            confidence: 0.9,
        }
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub detections: DetectionSet,
    /// Noise-free boxes rendered with the same camera pose as the detections.
    pub ground_truth: Vec<DetFileRecord>,
    pub targets: Vec<TargetSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.fps > 0.0) {
            return bad("fps must be positive");
        }
        if !(self.box_size.0 > 0.0 && self.box_size.1 > 0.0 && self.reference_depth > 0.0) {
            return bad("box size and reference depth must be positive");
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be non-negative");
        }
        if !(self.jitter.tilt_std >= 0.0 && self.jitter.yaw_std >= 0.0) {
            return bad("jitter deviations must be non-negative");
        }
        if !(self.image_size.0 > 0.0 && self.image_size.1 > 0.0) {
            return bad("image size must be positive");
        }
        Ok(())
    }

    fn visible_fraction(&self, target: &TargetSpec) -> f64 {
        if self.frames == 0 {
            return 1.0;
        }
        let visible = (0..self.frames)
            .filter(|&k| {
                let [x, y] = target.at(k as f64 / self.fps);
                self.in_image(&self.camera, x, y)
            })
            .count();
        visible as f64 / self.frames as f64
    }

    fn in_image(&self, camera: &CameraModel, x: f64, y: f64) -> bool {
        match camera.projection().project(x, y) {
            Ok((p, depth)) => {
                depth > 0.0
                    && (0.0..self.image_size.0).contains(&p.u)
                    && (0.0..self.image_size.1).contains(&p.v)
            }
            Err(_) => false,
        }
    }

    fn layout_ok(&self, targets: &[TargetSpec], min_sep: f64) -> bool {
        if targets
            .iter()
            .any(|t| self.visible_fraction(t) < MIN_VISIBLE_FRACTION)
        {
            return false;
        }
        if min_sep <= 0.0 {
            return true;
        }
        for k in 0..self.frames.max(1) {
            let t = k as f64 / self.fps;
            for (i, a) in targets.iter().enumerate() {
                for b in &targets[i + 1..] {
                    let (pa, pb) = (a.at(t), b.at(t));
                    if (pa[0] - pb[0]).hypot(pa[1] - pb[1]) < min_sep {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn draw_layout(&self, rng: &mut ChaCha8Rng) -> Result<Vec<TargetSpec>> {
        let spec = self.random_targets;
        let min_sep = spec.map_or(0.0, |r| r.min_separation);
        for _ in 0..MAX_LAYOUT_ATTEMPTS {
            let mut targets = self.targets.clone();
            if let Some(r) = spec {
                for _ in 0..r.count {
                    let x = rng.random_range(r.x_range.0..=r.x_range.1);
                    let y = rng.random_range(r.y_range.0..=r.y_range.1);
                    let speed = rng.random_range(0.0..=r.max_speed);
                    let heading = rng.random_range(0.0..std::f64::consts::TAU);
                    targets.push(TargetSpec {
                        position: [x, y],
                        velocity: [speed * heading.cos(), speed * heading.sin()],
                    });
                }
            }
            if self.layout_ok(&targets, min_sep) {
                return Ok(targets);
            }
        }
        Err(Error::Frustum {
            attempts: MAX_LAYOUT_ATTEMPTS,
        })
    }
}

/// Renders a scenario into detections and ground truth. Deterministic in `seed`.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<SyntheticSequence> {
    scenario.validate()?;
    let mut layout_rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = scenario.draw_layout(&mut layout_rng)?;

    // separate stream so layout retries do not shift the noise
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let nominal = scenario.camera.extrinsics;
    let mut jitter = JitterState::default();

    let mut detections = DetectionSet::new();
    let mut ground_truth = Vec::new();
    for k in 0..scenario.frames {
        let frame = k + 1;
        let pose = apply_jitter(&nominal, &scenario.jitter, &mut jitter, &mut rng);
        let camera = if scenario.jitter.is_zero() {
            scenario.camera
        } else {
            scenario.camera.with_extrinsics(pose)?
        };
        let t = k as f64 / scenario.fps;
        for (idx, target) in targets.iter().enumerate() {
            let [x, y] = target.at(t);
            let noise_u = unit.sample(&mut rng);
            let noise_v = unit.sample(&mut rng);
            if !scenario.in_image(&camera, x, y) {
                continue;
            }
            let (p, depth) = camera.projection().project(x, y)?;
            let w = scenario.box_size.0 * scenario.reference_depth / depth;
            let h = scenario.box_size.1 * scenario.reference_depth / depth;
            ground_truth.push(DetFileRecord {
                frame,
                id: idx as i64 + 1,
                bb_left: p.u - w / 2.0,
                bb_top: p.v - h,
                bb_width: w,
                bb_height: h,
                conf: 1.0,
            });
            let u = p.u + noise_u * scenario.noise * w;
            let v = p.v + noise_v * scenario.noise * h;
            detections.entry(frame).or_default().push(Detection::new(
                frame,
                [u - w / 2.0, v - h, w, h],
                scenario.confidence,
            ));
        }
    }
    Ok(SyntheticSequence {
        detections,
        ground_truth,
        targets,
    })
}

/// Parses a scenario file.
///
/// Labeled rows in the camera-file style; camera rows (`K`, `R`, `T`, `Z0`)
/// describe the nominal camera and default to [`default_camera`] when absent.
///
/// ```text
/// FRAMES: 100
/// FPS: 30
/// IMAGE: 1920 1080
/// BOX: 50 170 10          # width height reference_depth
/// NOISE: 0.05
/// JITTER: 0.0 0.0         # tilt_std yaw_std, rad/frame^2
/// CONF: 0.9
/// TARGET: x y vx vy       # repeatable
/// RANDOM: n xmin xmax ymin ymax max_speed min_separation
/// ```
pub fn parse_scenario_str(text: &str, path: &Path) -> Result<Scenario> {
    let mut sc = Scenario {
        random_targets: None,
        ..Scenario::default()
    };
    let mut cam = CameraRows::new();
    let mut any_camera = false;
    for row in labeled_rows(text, path)? {
        if cam.accept(&row, path)? {
            any_camera = true;
            continue;
        }
        match row.label.as_str() {
            "FRAMES" => {
                let v = row.numbers(path, 1)?[0];
                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(Error::parse(path, row.line, "FRAMES must be a non-negative integer"));
                }
                sc.frames = v as u32;
            }
            "FPS" => sc.fps = row.numbers(path, 1)?[0],
            "IMAGE" => {
                let v = row.numbers(path, 2)?;
                sc.image_size = (v[0], v[1]);
            }
            "BOX" => {
                let v = row.numbers(path, 3)?;
                sc.box_size = (v[0], v[1]);
                sc.reference_depth = v[2];
            }
            "NOISE" => sc.noise = row.numbers(path, 1)?[0],
            "JITTER" => {
                let v = row.numbers(path, 2)?;
                sc.jitter = JitterSpec::new(v[0], v[1]);
            }
            "CONF" => sc.confidence = row.numbers(path, 1)?[0],
            "TARGET" => {
                let v = row.numbers(path, 4)?;
                sc.targets.push(TargetSpec {
                    position: [v[0], v[1]],
                    velocity: [v[2], v[3]],
                });
            }
            "RANDOM" => {
                let v = row.numbers(path, 7)?;
                if v[0] < 0.0 || v[0].fract() != 0.0 {
                    return Err(Error::parse(path, row.line, "RANDOM count must be a non-negative integer"));
                }
                if !(v[1] <= v[2] && v[3] <= v[4] && v[5] >= 0.0) {
                    return Err(Error::parse(path, row.line, "RANDOM ranges are empty"));
                }
                sc.random_targets = Some(RandomTargets {
                    count: v[0] as usize,
                    x_range: (v[1], v[2]),
                    y_range: (v[3], v[4]),
                    max_speed: v[5],
                    min_separation: v[6],
                });
            }
            other => {
                return Err(Error::parse(path, row.line, format!("unknown label `{other}`")));
            }
        }
    }
    if any_camera {
        sc.camera = cam.build(path)?;
    }
    sc.validate()
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok(sc)
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario_str(&text, path)
}
