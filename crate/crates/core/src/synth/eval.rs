//! Desk-scale identity metrics with ground-plane distance matching.

use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector2;

use crate::association::{min_cost_matching, solve_assignment, CostMatrix};
use crate::geometry::{CameraModel, ImagePoint};
use crate::io::DetFileRecord;
use crate::tracker::FrameOutput;

/// Default ground distance (meters) under which a track box matches a truth box.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalReport {
    pub id_switches: u64,
    pub idf1: f64,
    pub mota: f64,
    /// Fraction of per-frame matches whose track is the one globally assigned to the truth id.
    pub association_accuracy: f64,
    pub num_gt: u64,
    pub num_predictions: u64,
    pub matches: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub idtp: u64,
}

/// Flattens tracker output into identity records.
pub fn outputs_to_records(outputs: &[FrameOutput]) -> Vec<DetFileRecord> {
    outputs
        .iter()
        .flat_map(|o| {
            o.boxes.iter().map(move |b| DetFileRecord {
                frame: o.frame,
                id: b.track_id as i64,
                bb_left: b.bb_left,
                bb_top: b.bb_top,
                bb_width: b.bb_width,
                bb_height: b.bb_height,
                conf: 1.0,
            })
        })
        .collect()
}

struct Entry {
    id: i64,
    ground: Option<Vector2<f64>>,
}

fn by_frame(records: &[DetFileRecord], camera: &CameraModel) -> BTreeMap<u32, Vec<Entry>> {
    let mut out: BTreeMap<u32, Vec<Entry>> = BTreeMap::new();
    for r in records {
        let p = ImagePoint::new(r.bb_left + r.bb_width / 2.0, r.bb_top + r.bb_height);
        let ground = camera
            .projection()
            .image_to_ground(p)
            .ok()
            .filter(|g| g.gamma > 0.0)
            .map(|g| g.xy());
        out.entry(r.frame).or_default().push(Entry { id: r.id, ground });
    }
    out
}

fn distance(a: &Entry, b: &Entry) -> Option<f64> {
    Some((a.ground? - b.ground?).norm())
}

/// Scores tracker output against ground truth.
///
/// Both sides are mapped to the ground through `camera` using their
/// bottom-center pixels, and compared by Euclidean distance.
pub fn evaluate(
    tracks: &[DetFileRecord],
    ground_truth: &[DetFileRecord],
    camera: &CameraModel,
    threshold: f64,
) -> EvalReport {
    let gt = by_frame(ground_truth, camera);
    let pr = by_frame(tracks, camera);

    let gt_ids: Vec<i64> = unique_ids(ground_truth);
    let pr_ids: Vec<i64> = unique_ids(tracks);
    let gt_index: HashMap<i64, usize> = gt_ids.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let pr_index: HashMap<i64, usize> = pr_ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();

    let mut report = EvalReport {
        num_gt: ground_truth.len() as u64,
        num_predictions: tracks.len() as u64,
        ..EvalReport::default()
    };

    let mut overlap = vec![0u64; gt_ids.len() * pr_ids.len()];
    let mut last_match: HashMap<i64, i64> = HashMap::new();
    let mut frame_matches: Vec<(usize, usize)> = Vec::new();
    let empty = Vec::new();

    let frames: std::collections::BTreeSet<u32> = gt.keys().chain(pr.keys()).copied().collect();
    for f in frames {
        let g = gt.get(&f).unwrap_or(&empty);
        let t = pr.get(&f).unwrap_or(&empty);

        for a in g {
            for b in t {
                if distance(a, b).is_some_and(|d| d <= threshold) {
                    overlap[gt_index[&a.id] * pr_ids.len() + pr_index[&b.id]] += 1;
                }
            }
        }

        let costs = CostMatrix::from_fn(g.len(), t.len(), threshold, |i, j| distance(&g[i], &t[j]));
        let assignment = solve_assignment(&costs);
        for &(i, j) in &assignment.matches {
            let (gid, tid) = (g[i].id, t[j].id);
            if let Some(prev) = last_match.insert(gid, tid) {
                if prev != tid {
                    report.id_switches += 1;
                }
            }
            frame_matches.push((gt_index[&gid], pr_index[&tid]));
        }
        report.matches += assignment.matches.len() as u64;
        report.false_negatives += assignment.unmatched_tracks.len() as u64;
        report.false_positives += assignment.unmatched_dets.len() as u64;
    }

    let errors = report.false_negatives + report.false_positives + report.id_switches;
    report.mota = 1.0 - errors as f64 / report.num_gt.max(1) as f64;

    let gt_len = count_by_id(ground_truth, &gt_index);
    let pr_len = count_by_id(tracks, &pr_index);
    let pairing = identity_pairing(&overlap, &gt_len, &pr_len);
    report.idtp = pairing
        .iter()
        .enumerate()
        .filter_map(|(g, t)| t.map(|t| overlap[g * pr_ids.len() + t]))
        .sum();
    let denom = report.num_gt + report.num_predictions;
    report.idf1 = if denom == 0 {
        1.0
    } else {
        2.0 * report.idtp as f64 / denom as f64
    };

    report.association_accuracy = if frame_matches.is_empty() {
        if denom == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        let consistent = frame_matches
            .iter()
            .filter(|(g, t)| pairing[*g] == Some(*t))
            .count();
        consistent as f64 / frame_matches.len() as f64
    };
    report
}

fn unique_ids(records: &[DetFileRecord]) -> Vec<i64> {
    let mut ids: Vec<i64> = records.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

fn count_by_id(records: &[DetFileRecord], index: &HashMap<i64, usize>) -> Vec<u64> {
    let mut counts = vec![0u64; index.len()];
    for r in records {
        counts[index[&r.id]] += 1;
    }
    counts
}

/// One-to-one truth/prediction identity pairing minimizing IDFN + IDFP.
///
/// Each side is padded with a private "unmatched" slot so that leaving an
/// identity unpaired costs all of its boxes.
fn identity_pairing(overlap: &[u64], gt_len: &[u64], pr_len: &[u64]) -> Vec<Option<usize>> {
    let ng = gt_len.len();
    let nt = pr_len.len();
    let size = ng + nt;
    if ng == 0 || nt == 0 {
        return vec![None; ng];
    }
    let mut data = vec![f64::INFINITY; size * size];
    for g in 0..ng {
        for t in 0..nt {
            let o = overlap[g * nt + t];
            data[g * size + t] = (gt_len[g] - o + pr_len[t] - o) as f64;
        }
        data[g * size + nt + g] = gt_len[g] as f64;
    }
    for t in 0..nt {
        data[(ng + t) * size + t] = pr_len[t] as f64;
        for g in 0..ng {
            data[(ng + t) * size + nt + g] = 0.0;
        }
    }
    let (assignment, _) = min_cost_matching(&CostMatrix::new(size, size, data, f64::INFINITY));
    let mut pairing = vec![None; ng];
    for (row, col) in assignment.matches {
        if row < ng && col < nt && overlap[row * nt + col] > 0 {
            pairing[row] = Some(col);
        }
    }
    pairing
}
