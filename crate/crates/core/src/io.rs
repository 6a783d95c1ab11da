//! Text formats: MOT-style detection/track files, camera parameters and
//! `seqinfo.ini`.
//!
//! Detection and track rows share one layout:
//!
//! ```text
//! frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z
//! ```
//!
//! Detections carry `id = -1`. The three trailing fields are parsed but
//! ignored, and always written as `-1`. Floats are written with two decimals.
//!
//! Camera files are labeled rows, `#` starts a comment:
//!
//! ```text
//! K: fx fy u0 v0
//! R: r11 r12 r13
//! R: r21 r22 r23
//! R: r31 r32 r33
//! T: tx ty tz
//! Z0: z0          # optional, defaults to 0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{CameraExtrinsics, CameraIntrinsics, CameraModel};
use crate::tracker::{Detection, DetectionSet, FrameOutput};

/// One row of a MOT-style file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetFileRecord {
    pub frame: u32,
    pub id: i64,
    pub bb_left: f64,
    pub bb_top: f64,
    pub bb_width: f64,
    pub bb_height: f64,
    pub conf: f64,
}

impl DetFileRecord {
    pub fn detection(&self) -> Detection {
        Detection::new(
            self.frame,
            [self.bb_left, self.bb_top, self.bb_width, self.bb_height],
            self.conf,
        )
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Fixed two-decimal formatting; negative zero is written as zero.
pub fn format_float(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn parse_records_str(text: &str, path: &Path) -> Result<Vec<DetFileRecord>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_record_line(line).map_err(|reason| Error::parse(path, line_no, reason))?);
    }
    Ok(out)
}

fn parse_record_line(line: &str) -> std::result::Result<DetFileRecord, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 10 {
        return Err(format!("expected 10 comma-separated fields, found {}", fields.len()));
    }
    let frame: u32 = fields[0]
        .parse()
        .map_err(|_| format!("frame `{}` is not a positive integer", fields[0]))?;
    if frame < 1 {
        return Err("frame must be at least 1".into());
    }
    let id: i64 = fields[1]
        .parse()
        .map_err(|_| format!("id `{}` is not an integer", fields[1]))?;
    let mut nums = [0.0f64; 8];
    let names = [
        "bb_left", "bb_top", "bb_width", "bb_height", "conf", "x", "y", "z",
    ];
    for (k, slot) in nums.iter_mut().enumerate() {
        let f = fields[k + 2];
        let v: f64 = f
            .parse()
            .map_err(|_| format!("{} `{f}` is not a number", names[k]))?;
        if !v.is_finite() {
            return Err(format!("{} `{f}` is not finite", names[k]));
        }
        *slot = v;
    }
    Ok(DetFileRecord {
        frame,
        id,
        bb_left: nums[0],
        bb_top: nums[1],
        bb_width: nums[2],
        bb_height: nums[3],
        conf: nums[4],
    })
}

pub fn parse_records(path: impl AsRef<Path>) -> Result<Vec<DetFileRecord>> {
    let path = path.as_ref();
    parse_records_str(&read(path)?, path)
}

/// Groups records by frame, keeping file order within a frame.
pub fn group_detections(records: &[DetFileRecord]) -> DetectionSet {
    let mut set = DetectionSet::new();
    for r in records {
        set.entry(r.frame).or_default().push(r.detection());
    }
    set
}

pub fn parse_detections(path: impl AsRef<Path>) -> Result<DetectionSet> {
    Ok(group_detections(&parse_records(path)?))
}

fn push_row(out: &mut String, frame: u32, id: i64, bbox: [f64; 4], conf: &str) {
    let _ = writeln!(
        out,
        "{frame},{id},{},{},{},{},{conf},-1,-1,-1",
        format_float(bbox[0]),
        format_float(bbox[1]),
        format_float(bbox[2]),
        format_float(bbox[3]),
    );
}

/// Track rows sorted by `(frame, id)` with confidence `1`.
pub fn format_tracks(outputs: &[FrameOutput]) -> String {
    let mut rows: Vec<(u32, u64, [f64; 4])> = outputs
        .iter()
        .flat_map(|o| {
            o.boxes
                .iter()
                .map(move |b| (o.frame, b.track_id, [b.bb_left, b.bb_top, b.bb_width, b.bb_height]))
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::new();
    for (frame, id, bbox) in rows {
        push_row(&mut out, frame, id as i64, bbox, "1");
    }
    out
}

pub fn write_tracks(path: impl AsRef<Path>, outputs: &[FrameOutput]) -> Result<()> {
    write(path.as_ref(), &format_tracks(outputs))
}

/// Identity-carrying rows (ground truth or tracks) sorted by `(frame, id)`.
pub fn format_identity_records(records: &[DetFileRecord]) -> String {
    let mut rows = records.to_vec();
    rows.sort_by_key(|r| (r.frame, r.id));
    let mut out = String::new();
    for r in rows {
        push_row(
            &mut out,
            r.frame,
            r.id,
            [r.bb_left, r.bb_top, r.bb_width, r.bb_height],
            "1",
        );
    }
    out
}

/// Detection rows with `id = -1`, in frame order.
pub fn format_detections(dets: &DetectionSet) -> String {
    let mut out = String::new();
    for (frame, list) in dets {
        for d in list {
            push_row(
                &mut out,
                *frame,
                -1,
                [d.bb_left, d.bb_top, d.bb_width, d.bb_height],
                &format_float(d.confidence),
            );
        }
    }
    out
}

pub fn write_detections(path: impl AsRef<Path>, dets: &DetectionSet) -> Result<()> {
    write(path.as_ref(), &format_detections(dets))
}

pub fn write_identity_records(path: impl AsRef<Path>, records: &[DetFileRecord]) -> Result<()> {
    write(path.as_ref(), &format_identity_records(records))
}

/// A non-empty, non-comment line of a labeled-row file.
#[derive(Debug, Clone)]
pub(crate) struct LabeledRow {
    pub line: usize,
    pub label: String,
    pub values: Vec<String>,
}

pub(crate) fn labeled_rows(text: &str, path: &Path) -> Result<Vec<LabeledRow>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((label, rest)) = line.split_once(':') else {
            return Err(Error::parse(path, idx + 1, format!("expected `LABEL: values`, got `{line}`")));
        };
        rows.push(LabeledRow {
            line: idx + 1,
            label: label.trim().to_string(),
            values: rest.split_whitespace().map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

impl LabeledRow {
    pub fn numbers(&self, path: &Path, expected: usize) -> Result<Vec<f64>> {
        if self.values.len() != expected {
            return Err(Error::parse(
                path,
                self.line,
                format!(
                    "{} row needs {expected} values, found {}",
                    self.label,
                    self.values.len()
                ),
            ));
        }
        self.values
            .iter()
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::parse(
                    path,
                    self.line,
                    format!("{} row: `{v}` is not a finite number", self.label),
                )),
            })
            .collect()
    }
}

/// Camera rows pulled out of a labeled-row file; other labels are left to the caller.
pub(crate) struct CameraRows {
    pub k: Option<[f64; 4]>,
    pub r: Vec<[f64; 3]>,
    pub t: Option<[f64; 3]>,
    pub z0: Option<f64>,
    pub last_line: usize,
}

impl CameraRows {
    pub fn new() -> Self {
        Self {
            k: None,
            r: Vec::new(),
            t: None,
            z0: None,
            last_line: 0,
        }
    }

    /// Consumes the row if it is a camera row.
    pub fn accept(&mut self, row: &LabeledRow, path: &Path) -> Result<bool> {
        self.last_line = self.last_line.max(row.line);
        let dup = |what: &str| Err(Error::parse(path, row.line, format!("duplicate {what} row")));
        match row.label.as_str() {
            "K" => {
                if self.k.is_some() {
                    return dup("K");
                }
                let v = row.numbers(path, 4)?;
                self.k = Some([v[0], v[1], v[2], v[3]]);
            }
            "R" => {
                if self.r.len() == 3 {
                    return Err(Error::parse(path, row.line, "more than three R rows"));
                }
                let v = row.numbers(path, 3)?;
                self.r.push([v[0], v[1], v[2]]);
            }
            "T" => {
                if self.t.is_some() {
                    return dup("T");
                }
                let v = row.numbers(path, 3)?;
                self.t = Some([v[0], v[1], v[2]]);
            }
            "Z0" => {
                if self.z0.is_some() {
                    return dup("Z0");
                }
                self.z0 = Some(row.numbers(path, 1)?[0]);
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn build(&self, path: &Path) -> Result<CameraModel> {
        let end = self.last_line + 1;
        let k = self
            .k
            .ok_or_else(|| Error::parse(path, end, "missing K row"))?;
        if self.r.len() < 3 {
            return Err(Error::parse(
                path,
                end,
                format!("missing R row {} of 3", self.r.len() + 1),
            ));
        }
        let t = self
            .t
            .ok_or_else(|| Error::parse(path, end, "missing T row"))?;
        let r = &self.r;
        let rotation = Matrix3::new(
            r[0][0], r[0][1], r[0][2], //
            r[1][0], r[1][1], r[1][2], //
            r[2][0], r[2][1], r[2][2],
        );
        CameraModel::new(
            CameraIntrinsics::new(k[0], k[1], k[2], k[3]),
            CameraExtrinsics::new(rotation, Vector3::new(t[0], t[1], t[2])),
            self.z0.unwrap_or(0.0),
        )
    }
}

pub fn parse_camera_str(text: &str, path: &Path) -> Result<CameraModel> {
    let mut rows = CameraRows::new();
    for row in labeled_rows(text, path)? {
        if !rows.accept(&row, path)? {
            return Err(Error::parse(
                path,
                row.line,
                format!("unknown label `{}`", row.label),
            ));
        }
    }
    rows.build(path)
}

/// Loads and validates a camera file, building the projection eagerly.
pub fn parse_camera(path: impl AsRef<Path>) -> Result<CameraModel> {
    let path = path.as_ref();
    parse_camera_str(&read(path)?, path)
}

/// Camera rows with shortest round-trip float formatting.
pub fn format_camera(cam: &CameraModel) -> String {
    let k = &cam.intrinsics;
    let r = &cam.extrinsics.rotation;
    let t = &cam.extrinsics.translation;
    let mut out = String::new();
    let _ = writeln!(out, "K: {} {} {} {}", k.fx, k.fy, k.u0, k.v0);
    for i in 0..3 {
        let _ = writeln!(out, "R: {} {} {}", r[(i, 0)], r[(i, 1)], r[(i, 2)]);
    }
    let _ = writeln!(out, "T: {} {} {}", t.x, t.y, t.z);
    let _ = writeln!(out, "Z0: {}", cam.z0);
    out
}

pub fn write_camera(path: impl AsRef<Path>, cam: &CameraModel) -> Result<()> {
    write(path.as_ref(), &format_camera(cam))
}

pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SeqInfo {
    pub name: String,
    pub fps: f64,
    pub image_width: Option<u32>,
    pub image_height: Option<u32>,
    pub length: Option<u32>,
}

impl Default for SeqInfo {
    fn default() -> Self {
        Self {
            name: String::new(),
            fps: DEFAULT_FPS,
            image_width: None,
            image_height: None,
            length: None,
        }
    }
}

pub fn parse_seqinfo_str(text: &str, path: &Path) -> Result<SeqInfo> {
    let mut info = SeqInfo::default();
    let mut saw_fps = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(path, idx + 1, format!("expected key=value, got `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let int = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| Error::parse(path, idx + 1, format!("{key} `{v}` is not an integer")))
        };
        match key {
            "name" => info.name = value.to_string(),
            "frameRate" => {
                let fps: f64 = value.parse().map_err(|_| {
                    Error::parse(path, idx + 1, format!("frameRate `{value}` is not a number"))
                })?;
                if !(fps > 0.0) || !fps.is_finite() {
                    return Err(Error::parse(path, idx + 1, "frameRate must be positive"));
                }
                info.fps = fps;
                saw_fps = true;
            }
            "seqLength" => info.length = Some(int(value)?),
            "imWidth" => info.image_width = Some(int(value)?),
            "imHeight" => info.image_height = Some(int(value)?),
            _ => {}
        }
    }
    if !saw_fps {
        log::warn!("{}: no frameRate, assuming {DEFAULT_FPS}", path.display());
    }
    Ok(info)
}

/// Reads `seqinfo.ini`. A missing file yields defaults with a warning.
pub fn parse_seqinfo(path: impl AsRef<Path>) -> Result<SeqInfo> {
    let path = path.as_ref();
    match fs::read_to_string(path) {
        Ok(text) => parse_seqinfo_str(&text, path),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            log::warn!("{} not found, using default sequence info", path.display());
            Ok(SeqInfo::default())
        }
        Err(e) => Err(Error::io(path, e)),
    }
}
