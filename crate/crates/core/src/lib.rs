//! Motion-only multi-object tracking on the ground plane.
//!
//! Detections are back-projected through a calibrated camera onto the ground
//! plane, where each one carries a correlated covariance derived from its
//! pixel noise. Tracks are constant-velocity Kalman filters whose process
//! noise absorbs camera motion, and association minimizes a normalized
//! Mahalanobis distance under a gate.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: camera model, image/ground mapping, covariance propagation
//! - [`kalman`]: ground-plane constant-velocity filter
//! - [`association`]: distance, cost matrix, gated assignment
//! - [`tracker`]: the per-frame loop and track lifecycle
//! - [`io`]: MOT-style text files, camera and sequence descriptions
//! - [`synth`]: synthetic scenes, camera jitter, evaluation and an IoU baseline
//! - [`cli`]: the workflows behind the `ucmc` binary

// negated comparisons are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kalman;
pub mod synth;
pub mod tracker;

pub use association::{mmd, solve_assignment, AssignmentResult, CostMatrix};
pub use error::{Error, Result};
pub use geometry::{
    CameraExtrinsics, CameraIntrinsics, CameraModel, GroundMeasurement, GroundPoint, ImagePoint,
    ProjectionMatrix,
};
pub use kalman::{KalmanState, ProcessNoiseParams};
pub use tracker::{Detection, DetectionSet, FrameOutput, TrackBox, Tracker, TrackerConfig};
