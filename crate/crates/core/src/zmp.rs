//! Lateral zero moment point and linear-inverted-pendulum propagation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpg::Leg;
use crate::gait::{foot_to_slider, RobotGeometry};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZmpError {
    #[error("no body segments given")]
    Empty,
    #[error("degenerate support: vertical load {0} <= 0")]
    DegenerateSupport(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodySegment {
    pub m: f64,
    pub x: f64,
    pub z: f64,
    pub ax: f64,
    pub az: f64,
}

/// Which moment balance [`compute_zmp_x`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZmpForm {
    /// Horizontal inertial moment `m * ax * z`.
    #[default]
    Standard,
    /// The published variant with `m * (ax + g) * z`, kept for comparison.
    Literal,
}

/// Lateral ZMP of a set of body segments.
pub fn compute_zmp_x(segments: &[BodySegment], g: f64, form: ZmpForm) -> Result<f64, ZmpError> {
    if segments.is_empty() {
        return Err(ZmpError::Empty);
    }
    let mut load = 0.0;
    let mut gravity_moment = 0.0;
    let mut inertial_moment = 0.0;
    for s in segments {
        let vertical = s.m * (s.az + g);
        load += vertical;
        gravity_moment += vertical * s.x;
        let horizontal = match form {
            ZmpForm::Standard => s.ax,
            ZmpForm::Literal => s.ax + g,
        };
        inertial_moment += s.m * horizontal * s.z;
    }
    if !(load > 0.0) {
        return Err(ZmpError::DegenerateSupport(load));
    }
    Ok((gravity_moment - inertial_moment) / load)
}

/// Natural frequency `sqrt(g / z_g)` of the pendulum.
pub fn pendulum_frequency(g: f64, z_g: f64) -> f64 {
    (g / z_g).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PendulumState {
    pub x: f64,
    pub xdot: f64,
}

impl PendulumState {
    pub fn new(x: f64, xdot: f64) -> Self {
        Self { x, xdot }
    }

    /// Capture point `x + xdot / q`.
    pub fn capture_point(&self, q: f64) -> f64 {
        self.x + self.xdot / q
    }
}

/// `[[cosh qt, sinh(qt)/q], [q sinh qt, cosh qt]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl TransitionMatrix {
    pub fn new(t: f64, q: f64) -> Self {
        let (s, c) = ((q * t).sinh(), (q * t).cosh());
        Self {
            m11: c,
            m12: s / q,
            m21: q * s,
            m22: c,
        }
    }

    pub fn identity() -> Self {
        Self {
            m11: 1.0,
            m12: 0.0,
            m21: 0.0,
            m22: 1.0,
        }
    }

    /// Determinant via Kahan's compensated 2x2 formula, which avoids the
    /// cancellation in `cosh^2 - sinh^2`.
    pub fn det(&self) -> f64 {
        let p = self.m12 * self.m21;
        let err = self.m12.mul_add(self.m21, -p);
        self.m11.mul_add(self.m22, -p) - err
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
        }
    }

    pub fn apply(&self, d: PendulumState) -> PendulumState {
        PendulumState {
            x: self.m11 * d.x + self.m12 * d.xdot,
            xdot: self.m21 * d.x + self.m22 * d.xdot,
        }
    }
}

pub fn transition_matrix(t: f64, q: f64) -> TransitionMatrix {
    TransitionMatrix::new(t, q)
}

/// Closed-form solution of `xddot = q^2 (x - x_zmp)` after time `t`.
pub fn propagate_cog(d0: PendulumState, x_zmp: f64, t: f64, q: f64) -> PendulumState {
    // Working relative to the pivot is the same as T d0 + (I - T) C with C = (x_zmp, 0).
    let rel = PendulumState::new(d0.x - x_zmp, d0.xdot);
    let out = TransitionMatrix::new(t, q).apply(rel);
    PendulumState::new(out.x + x_zmp, out.xdot)
}

/// Foothold and per-leg slider targets for the next lateral step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    /// Unclamped capture foothold (m, world frame).
    pub foothold_x: f64,
    /// Foothold offset from the current CoG (m).
    pub offset: f64,
    /// Slider amplitudes in leg order LF, RF, RH, LH (m).
    pub slider_targets: [f64; 4],
    pub clamped: bool,
    /// Number of steps of maximal reach needed to cover the offset.
    pub steps_remaining_hint: u32,
}

/// Plans a step onto the capture point of `d`.
pub fn plan_step(d: PendulumState, q: f64, geom: &RobotGeometry) -> StepPlan {
    let offset = d.xdot / q;
    let mut slider_targets = [0.0; 4];
    let mut clamped = false;
    for leg in Leg::ALL {
        let t = foot_to_slider(offset, leg, geom);
        slider_targets[leg.index()] = t.slider;
        clamped |= t.clamped;
    }
    let steps_remaining_hint = (offset.abs() / geom.max_foot_reach()).ceil() as u32;
    StepPlan {
        foothold_x: d.capture_point(q),
        offset,
        slider_targets,
        clamped,
        steps_remaining_hint,
    }
}
