//! Essential blow-up sequence extraction and parabolic rescaling.
//!
//! A blow-up candidate is a recorded step whose curvature scale dominates the
//! whole history before it up to a factor `C >= 1`: with `B_k` the sup of
//! `|Riem|` at `t_k`, the selected times satisfy
//! `sup_{[0, t_k]} |Riem| <= C B_k`. Rescaling a snapshot by `B` stretches the
//! radius by `sqrt(B)`, keeps `f` pointwise, divides curvatures by `B` and
//! carries the scalar field unscaled, so the rescaled curvature at the
//! blow-up node is 1 by construction.

use alloc::vec::Vec;
use core::fmt;

use crate::dynamics::HistorySample;
use crate::geometry;
use crate::math;
use crate::state::{reconstruct_u, FlowParameters, FlowState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityError {
    /// The dominance constant must satisfy `C >= 1`.
    InvalidConstant,
    EmptyHistory,
    /// A history sample points outside the radius table.
    InvalidHistory,
    /// Rescaling factor must be positive and finite.
    InvalidScale,
}

impl fmt::Display for SingularityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityError::InvalidConstant => write!(f, "blow-up constant C must be >= 1"),
            SingularityError::EmptyHistory => write!(f, "history is empty"),
            SingularityError::InvalidHistory => {
                write!(f, "history node index outside the radius table")
            }
            SingularityError::InvalidScale => {
                write!(f, "rescaling factor must be positive and finite")
            }
        }
    }
}

impl core::error::Error for SingularityError {}

/// One blow-up candidate: time, attaining node, its radius and the curvature
/// scale `B_k = sup_r |Riem|(t_k, .)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpPoint {
    pub t: f64,
    pub node: usize,
    pub r: f64,
    pub curvature_scale: f64,
}

/// The selected essential blow-up sequence candidates.
#[derive(Debug, Clone)]
pub struct BlowUpRecord {
    pub c_used: f64,
    pub points: Vec<BlowUpPoint>,
}

impl BlowUpRecord {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Scans a per-step curvature history for essential blow-up candidates.
///
/// `radii` maps node indices to radii (the grid nodes). Returns an empty
/// record when curvature never grew beyond its initial value.
pub fn track_blowup(
    history: &[HistorySample],
    radii: &[f64],
    c: f64,
) -> Result<BlowUpRecord, SingularityError> {
    if !(c >= 1.0) {
        return Err(SingularityError::InvalidConstant);
    }
    if history.is_empty() {
        return Err(SingularityError::EmptyHistory);
    }
    let sup0 = history[0].sup_riem;
    let sup_max = history.iter().fold(0.0_f64, |m, s| m.max(s.sup_riem));
    let mut points = Vec::new();
    if sup_max <= 0.0 || sup_max <= sup0 {
        return Ok(BlowUpRecord { c_used: c, points });
    }
    let mut running = 0.0_f64;
    for sample in history {
        running = running.max(sample.sup_riem);
        if sample.sup_riem > 0.0 && running <= c * sample.sup_riem {
            let r = *radii
                .get(sample.node)
                .ok_or(SingularityError::InvalidHistory)?;
            points.push(BlowUpPoint {
                t: sample.t,
                node: sample.node,
                r,
                curvature_scale: sample.sup_riem,
            });
        }
    }
    Ok(BlowUpRecord { c_used: c, points })
}

/// The `s = 0` slice of a parabolic rescaling by `b`, in rotationally
/// symmetric data.
#[derive(Debug, Clone)]
pub struct RescaledProfile {
    pub b: f64,
    /// Stretched radius `sqrt(b) * r`.
    pub radius: Vec<f64>,
    /// Metric factor, scale invariant: same nodal values on stretched radii.
    pub f: Vec<f64>,
    /// `z / sqrt(b)`: the field gradient in stretched coordinates.
    pub z: Vec<f64>,
    /// Scalar field, carried unscaled.
    pub u: Vec<f64>,
    /// `lambda_1 / b` — pure arithmetic on the snapshot values, no
    /// re-differencing.
    pub lambda1: Vec<f64>,
    /// `lambda_2 / b`.
    pub lambda2: Vec<f64>,
    /// `|Riem|^2 / b^2`.
    pub riem_norm_sq: Vec<f64>,
}

/// Rescales a snapshot by the curvature scale `b`.
pub fn rescale(
    state: &FlowState,
    params: &FlowParameters,
    b: f64,
) -> Result<RescaledProfile, SingularityError> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(SingularityError::InvalidScale);
    }
    let sqrt_b = math::sqrt(b);
    let curv = geometry::curvature(state, params);
    let radius = state.grid().nodes().iter().map(|&r| sqrt_b * r).collect();
    let z = state.z.iter().map(|&v| v / sqrt_b).collect();
    let lambda1 = curv.lambda1.iter().map(|&v| v / b).collect();
    let lambda2 = curv.lambda2.iter().map(|&v| v / b).collect();
    let riem_norm_sq = curv.riem_norm_sq.iter().map(|&v| v / (b * b)).collect();
    Ok(RescaledProfile {
        b,
        radius,
        f: state.f.clone(),
        z,
        u: reconstruct_u(state),
        lambda1,
        lambda2,
        riem_norm_sq,
    })
}
