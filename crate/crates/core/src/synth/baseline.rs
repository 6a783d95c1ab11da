//! Image-plane IoU tracker used only as a comparator.
//!
//! Lifecycle and assignment mirror [`Tracker`](crate::tracker::Tracker):
//! single-stage association, the same confidence threshold for births and
//! the same lost-time threshold. Each track is represented by its last
//! associated box, and the cost is `1 - IoU`.

use crate::association::{solve_assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::tracker::{Detection, DetectionSet, FrameOutput, TrackBox, TrackerConfig};

/// Minimum IoU for a track/detection pair to be eligible.
pub const IOU_GATE: f64 = 0.1;

/// Intersection over union of two `[left, top, width, height]` boxes.
pub fn iou(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let x1 = a[0].max(b[0]);
    let y1 = a[1].max(b[1]);
    let x2 = (a[0] + a[2]).min(b[0] + b[2]);
    let y2 = (a[1] + a[3]).min(b[1] + b[3]);
    let inter = (x2 - x1).max(0.0) * (y2 - y1).max(0.0);
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
struct IouTrack {
    id: u64,
    bbox: [f64; 4],
    miss_time: u32,
}

#[derive(Debug, Clone)]
pub struct IouTracker {
    config: TrackerConfig,
    tracks: Vec<IouTrack>,
    next_id: u64,
    last_frame: Option<u32>,
}

fn bbox(d: &Detection) -> [f64; 4] {
    [d.bb_left, d.bb_top, d.bb_width, d.bb_height]
}

impl IouTracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        })
    }

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
        Ok(FrameOutput {
            frame,
            boxes: self.advance(detections),
        })
    }

    fn advance(&mut self, detections: &[Detection]) -> Vec<TrackBox> {
        let dets: Vec<&Detection> = detections.iter().filter(|d| d.has_valid_size()).collect();
        let costs = CostMatrix::from_fn(self.tracks.len(), dets.len(), 1.0 - IOU_GATE, |i, j| {
            Some(1.0 - iou(&self.tracks[i].bbox, &bbox(dets[j])))
        });
        let assignment = solve_assignment(&costs);

        let mut matched = vec![false; self.tracks.len()];
        for &(ti, di) in &assignment.matches {
            self.tracks[ti].bbox = bbox(dets[di]);
            self.tracks[ti].miss_time = 0;
            matched[ti] = true;
        }
        let threshold = self.config.dt_threshold;
        let mut kept = Vec::new();
        let mut kept_matched = Vec::new();
        for (mut t, m) in std::mem::take(&mut self.tracks).into_iter().zip(matched) {
            if !m {
                t.miss_time += 1;
                if t.miss_time > threshold {
                    continue;
                }
            }
            kept.push(t);
            kept_matched.push(m);
        }
        self.tracks = kept;
        for &di in &assignment.unmatched_dets {
            if dets[di].confidence < self.config.tau {
                continue;
            }
            self.tracks.push(IouTrack {
                id: self.next_id,
                bbox: bbox(dets[di]),
                miss_time: 0,
            });
            self.next_id += 1;
            kept_matched.push(true);
        }
        let mut out: Vec<TrackBox> = self
            .tracks
            .iter()
            .zip(&kept_matched)
            .filter(|(_, &m)| m || self.config.emit_coasted)
            .map(|(t, _)| TrackBox {
                track_id: t.id,
                bb_left: t.bbox[0],
                bb_top: t.bbox[1],
                bb_width: t.bbox[2],
                bb_height: t.bbox[3],
            })
            .collect();
        out.sort_by_key(|b| b.track_id);
        out
    }
}

/// Runs the IoU comparator over every frame in the detections' range.
pub fn run_iou_baseline(detections: &DetectionSet, config: &TrackerConfig) -> Result<Vec<FrameOutput>> {
    let mut tracker = IouTracker::new(*config)?;
    let (Some(&first), Some(&last)) = (detections.keys().next(), detections.keys().next_back()) else {
        return Ok(Vec::new());
    };
    (first..=last)
        .map(|f| tracker.step(f, detections.get(&f).map(Vec::as_slice).unwrap_or(&[])))
        .collect()
}
