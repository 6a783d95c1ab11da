//! Mapped Mahalanobis distance, gated cost matrices and optimal assignment.

mod solver;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::GroundMeasurement;
use crate::kalman::{innovation_cov, invert_spd2, observation_matrix, KalmanState};

pub use solver::{min_cost_matching, solve_assignment, AssignmentResult};

/// Default association gate on the normalized distance.
pub const DEFAULT_GATE: f64 = 13.3;

/// `z - H x`.
pub fn residual(z: &GroundMeasurement, s: &KalmanState) -> Vector2<f64> {
    z.position - observation_matrix() * s.mean
}

/// `H P H^T + R_k`.
pub fn residual_cov(s: &KalmanState, z: &GroundMeasurement) -> Matrix2<f64> {
    innovation_cov(s, z)
}

/// `eps^T S^-1 eps + ln|S|`. May be negative when `|S| < 1`.
pub fn normalized_mahalanobis(eps: &Vector2<f64>, s: &Matrix2<f64>) -> Result<f64> {
    let inv = invert_spd2(s)?;
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    Ok((eps.transpose() * inv * eps)[0] + det.ln())
}

/// Mapped Mahalanobis distance between a ground measurement and a predicted track.
pub fn mmd(z: &GroundMeasurement, s: &KalmanState) -> Result<f64> {
    normalized_mahalanobis(&residual(z, s), &residual_cov(s, z))
}

/// Dense `tracks × detections` cost matrix. Forbidden cells hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    gate: f64,
}

impl CostMatrix {
    /// Takes row-major costs; anything above `gate` or not finite becomes forbidden.
    pub fn new(rows: usize, cols: usize, mut data: Vec<f64>, gate: f64) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        for c in &mut data {
            if !c.is_finite() || *c > gate {
                *c = f64::INFINITY;
            }
        }
        Self {
            rows,
            cols,
            data,
            gate,
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        gate: f64,
        mut f: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j).unwrap_or(f64::INFINITY));
            }
        }
        Self::new(rows, cols, data, gate)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn gate(&self) -> f64 {
        self.gate
    }

    /// Cost of a cell, or `None` when forbidden.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let c = self.data[row * self.cols + col];
        c.is_finite().then_some(c)
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.data
    }
}

/// Gated MMD cost matrix. Degenerate pairs are forbidden rather than fatal.
///
/// With `parallel` set, rows are computed on the current rayon pool; each
/// entry is evaluated independently so the result is bit-identical.
pub fn build_cost_matrix(
    tracks: &[KalmanState],
    measurements: &[GroundMeasurement],
    gate: f64,
    parallel: bool,
) -> CostMatrix {
    let row = |t: &KalmanState| -> Vec<f64> {
        measurements
            .iter()
            .map(|z| mmd(z, t).unwrap_or(f64::INFINITY))
            .collect()
    };
    let data: Vec<f64> = if parallel {
        tracks.par_iter().flat_map_iter(row).collect()
    } else {
        tracks.iter().flat_map(row).collect()
    };
    CostMatrix::new(tracks.len(), measurements.len(), data, gate)
}
