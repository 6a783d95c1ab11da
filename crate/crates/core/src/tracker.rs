//! Online tracker: predict, map, associate, update and manage track lifecycles.

use std::collections::BTreeMap;

use crate::association::{build_cost_matrix, solve_assignment, DEFAULT_GATE};
use crate::error::{Error, Result};
use crate::geometry::{CameraModel, GroundMeasurement, ImagePoint};
use crate::kalman::{predict, update, KalmanState, ProcessNoiseParams};

/// Image-plane detection for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub bb_left: f64,
    pub bb_top: f64,
    pub bb_width: f64,
    pub bb_height: f64,
    pub confidence: f64,
}

impl Detection {
    pub fn new(frame: u32, bbox: [f64; 4], confidence: f64) -> Self {
        Self {
            frame,
            bb_left: bbox[0],
            bb_top: bbox[1],
            bb_width: bbox[2],
            bb_height: bbox[3],
            confidence,
        }
    }

    /// Midpoint of the bottom edge, taken as the ground-contact pixel.
    pub fn bottom_center(&self) -> ImagePoint {
        ImagePoint::new(self.bb_left + self.bb_width / 2.0, self.bb_top + self.bb_height)
    }

    pub fn has_valid_size(&self) -> bool {
        self.bb_width > 0.0 && self.bb_height > 0.0
    }
}

/// Detections grouped by frame index.
pub type DetectionSet = BTreeMap<u32, Vec<Detection>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub state: KalmanState,
    /// Frames since the last association.
    pub miss_time: u32,
    /// Frames since creation.
    pub age: u32,
    /// Number of associated detections, including the one that started it.
    pub hits: u32,
    /// `(width, height)` of the most recent associated box, in pixels.
    pub last_box: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Minimum confidence for an unmatched detection to start a track.
    pub tau: f64,
    /// Frames a track may go unmatched before it is deleted.
    pub dt_threshold: u32,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Detection noise factor.
    pub sigma_m: f64,
    pub gate: f64,
    pub fps: f64,
    /// Emit tracks that were not matched this frame at their predicted position.
    pub emit_coasted: bool,
    pub min_hits: u32,
    /// Prior velocity standard deviation for new tracks (m/s).
    pub init_velocity_std: f64,
    /// Build cost-matrix rows on the rayon pool.
    pub parallel: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            tau: 0.6,
            dt_threshold: 30,
            sigma_x: 5.0,
            sigma_y: 5.0,
            sigma_m: 0.05,
            gate: DEFAULT_GATE,
            fps: 30.0,
            emit_coasted: false,
            min_hits: 1,
            init_velocity_std: 5.0,
            parallel: false,
        }
    }
}

impl TrackerConfig {
    /// Defaults tuned for a fixed camera.
    pub fn static_scene() -> Self {
        Self {
            sigma_x: 0.5,
            sigma_y: 0.5,
            ..Self::default()
        }
    }

    pub fn with_compensation(mut self, sigma: f64) -> Self {
        self.sigma_x = sigma;
        self.sigma_y = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau must lie in [0, 1], got {}", self.tau));
        }
        if self.dt_threshold < 1 {
            return bad("dt_threshold must be at least 1".into());
        }
        if !(self.sigma_x >= 0.0 && self.sigma_y >= 0.0) {
            return bad("compensation factors must be non-negative".into());
        }
        if !(self.sigma_m > 0.0) || !self.sigma_m.is_finite() {
            return bad(format!("sigma_m must be positive, got {}", self.sigma_m));
        }
        if self.gate.is_nan() {
            return bad("gate must be a number".into());
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        if !(self.init_velocity_std >= 0.0) {
            return bad("init_velocity_std must be non-negative".into());
        }
        Ok(())
    }

    pub fn process_noise(&self) -> Result<ProcessNoiseParams> {
        ProcessNoiseParams::new(self.sigma_x, self.sigma_y, 1.0 / self.fps)
    }
}

/// One emitted box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackBox {
    pub track_id: u64,
    pub bb_left: f64,
    pub bb_top: f64,
    pub bb_width: f64,
    pub bb_height: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameOutput {
    pub frame: u32,
    /// Sorted by track id.
    pub boxes: Vec<TrackBox>,
}

/// Lifetime counters for a tracker instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrackerStats {
    pub frames: u64,
    pub tracks_created: u64,
    pub tracks_deleted: u64,
    /// Detections with a non-positive box size.
    pub dropped_invalid: u64,
    /// Detections whose bottom-center maps to or beyond the horizon.
    pub dropped_horizon: u64,
}

impl TrackerStats {
    pub fn dropped_detections(&self) -> u64 {
        self.dropped_invalid + self.dropped_horizon
    }
}

/// Places a box of the track's last size with its bottom-center at the
/// projected ground position. Returns `None` behind the camera or at the horizon.
pub fn emit_box(track: &Track, camera: &CameraModel) -> Option<TrackBox> {
    let pos = track.state.position();
    let (p, depth) = camera.projection().project(pos.x, pos.y).ok()?;
    if depth <= 0.0 || !p.u.is_finite() || !p.v.is_finite() {
        return None;
    }
    let (w, h) = track.last_box;
    Some(TrackBox {
        track_id: track.id,
        bb_left: p.u - w / 2.0,
        bb_top: p.v - h,
        bb_width: w,
        bb_height: h,
    })
}

#[derive(Debug, Clone)]
pub struct Tracker {
    camera: CameraModel,
    config: TrackerConfig,
    noise: ProcessNoiseParams,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u32>,
    stats: TrackerStats,
}

impl Tracker {
    pub fn new(camera: CameraModel, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            camera,
            noise: config.process_noise()?,
            config,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            stats: TrackerStats::default(),
        })
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn stats(&self) -> TrackerStats {
        self.stats
    }

    /// Processes one frame. Skipped frame indices are advanced with no
    /// detections so predictions and miss counters stay consistent.
    pub fn step(&mut self, frame: u32, detections: &[Detection]) -> Result<FrameOutput> {
        if let Some(prev) = self.last_frame {
            if frame <= prev {
                return Err(Error::FrameOrder {
                    previous: prev,
                    got: frame,
                });
            }
            for _ in prev + 1..frame {
                self.advance(&[]);
            }
        }
        self.last_frame = Some(frame);
        let emitted = self.advance(detections);
        Ok(FrameOutput {
            frame,
            boxes: emitted,
        })
    }

    fn advance(&mut self, detections: &[Detection]) -> Vec<TrackBox> {
        self.stats.frames += 1;

        for t in &mut self.tracks {
            t.state = predict(&t.state, &self.noise);
            t.age += 1;
        }

        let mut usable: Vec<(&Detection, GroundMeasurement)> = Vec::with_capacity(detections.len());
        for d in detections {
            if !d.has_valid_size() {
                self.stats.dropped_invalid += 1;
                continue;
            }
            match self.camera.projection().map_measurement(
                d.bottom_center(),
                (d.bb_width, d.bb_height),
                self.config.sigma_m,
            ) {
                Ok(z) if self.in_front(&z) => usable.push((d, z)),
                _ => self.stats.dropped_horizon += 1,
            }
        }

        let states: Vec<KalmanState> = self.tracks.iter().map(|t| t.state).collect();
        let measurements: Vec<GroundMeasurement> = usable.iter().map(|(_, z)| *z).collect();
        let costs = build_cost_matrix(&states, &measurements, self.config.gate, self.config.parallel);
        let assignment = solve_assignment(&costs);

        let mut matched = vec![false; self.tracks.len()];
        for &(ti, di) in &assignment.matches {
            let (det, z) = &usable[di];
            let track = &mut self.tracks[ti];
            match update(&track.state, z) {
                Ok(s) => {
                    track.state = s;
                    track.miss_time = 0;
                    track.hits += 1;
                    track.last_box = (det.bb_width, det.bb_height);
                    matched[ti] = true;
                }
                Err(e) => log::debug!("track {} update failed: {e}", track.id),
            }
        }

        let threshold = self.config.dt_threshold;
        let mut kept = Vec::with_capacity(self.tracks.len());
        let mut kept_matched = Vec::with_capacity(self.tracks.len());
        for (t, m) in std::mem::take(&mut self.tracks).into_iter().zip(matched) {
            let mut t = t;
            if !m {
                t.miss_time += 1;
                if t.miss_time > threshold {
                    self.stats.tracks_deleted += 1;
                    continue;
                }
            }
            kept.push(t);
            kept_matched.push(m);
        }
        self.tracks = kept;

        for &di in &assignment.unmatched_dets {
            let (det, z) = &usable[di];
            if det.confidence < self.config.tau {
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            self.stats.tracks_created += 1;
            self.tracks.push(Track {
                id,
                state: KalmanState::initiate(z, self.config.init_velocity_std),
                miss_time: 0,
                age: 0,
                hits: 1,
                last_box: (det.bb_width, det.bb_height),
            });
            kept_matched.push(true);
        }

        let mut out: Vec<TrackBox> = self
            .tracks
            .iter()
            .zip(&kept_matched)
            .filter(|(t, &m)| (m || self.config.emit_coasted) && t.hits >= self.config.min_hits)
            .filter_map(|(t, _)| emit_box(t, &self.camera))
            .collect();
        out.sort_by_key(|b| b.track_id);
        out
    }

    fn in_front(&self, z: &GroundMeasurement) -> bool {
        self.camera
            .projection()
            .project(z.position.x, z.position.y)
            .map(|(_, depth)| depth > 0.0)
            .unwrap_or(false)
    }
}

/// Runs a whole sequence and returns one output per frame, empty frames included.
///
/// Frames span the detections' range, or `1..=last_frame` (extended to the
/// last detection) when the sequence length is known.
pub fn run_sequence(
    detections: &DetectionSet,
    camera: &CameraModel,
    config: &TrackerConfig,
    last_frame: Option<u32>,
) -> Result<(Vec<FrameOutput>, TrackerStats)> {
    let mut tracker = Tracker::new(*camera, *config)?;
    let first_det = detections.keys().next().copied();
    let last_det = detections.keys().next_back().copied();
    let (first, end) = match (last_frame, first_det, last_det) {
        (Some(last), _, l) => (1, last.max(l.unwrap_or(0))),
        (None, Some(f), Some(l)) => (f, l),
        _ => return Ok((Vec::new(), tracker.stats())),
    };
    let mut outputs = Vec::with_capacity((end.saturating_sub(first) + 1) as usize);
    for frame in first..=end {
        let dets = detections.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        outputs.push(tracker.step(frame, dets)?);
    }
    Ok((outputs, tracker.stats()))
}
