//! Lumped lateral plant: a linear inverted pendulum over the support line of
//! the diagonal stance pair.
//!
//! The body pivots about an effective ZMP that sits on the current foothold,
//! shifted by the trot sway of the stance pair and by the passive regulation
//! the stance feet can supply within the foot row:
//!
//! ```text
//! zmp   = foothold + sway * pair_sign + clamp(kp (x - foothold) + kd xdot, +-halfwidth)
//! xddot = q^2 (x - zmp) + F / M
//! ```
//!
//! With `kp = kd = sway = 0` this is the bare pendulum `xddot = q^2 (x - foothold) + F / M`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpg::StancePair;
use crate::gait::RobotGeometry;
use crate::zmp::{pendulum_frequency, PendulumState, ZmpForm, GRAVITY};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("non-finite plant state at t = {0} s")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Signed lateral force (N).
    pub force: f64,
    pub t_start: f64,
    pub duration: f64,
}

impl Disturbance {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.force.is_finite() && self.t_start.is_finite() && self.t_start >= 0.0) {
            return Err(PlantError::InvalidParam {
                name: "disturbance",
                reason: "force and start time must be finite, start >= 0".into(),
            });
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(PlantError::InvalidParam {
                name: "disturbance.duration",
                reason: "must be > 0".into(),
            });
        }
        Ok(())
    }

    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.t_start && t < self.end()
    }
}

/// Sum of the forces active at `t`.
pub fn force_at(disturbances: &[Disturbance], t: f64) -> f64 {
    disturbances.iter().filter(|d| d.active_at(t)).map(|d| d.force).sum()
}

/// Plant-only settings; mass, CoG height and foot row come from the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantTuning {
    /// m/s^2
    pub g: f64,
    /// Passive ZMP shift per metre of CoG offset.
    pub stance_kp: f64,
    /// Passive ZMP shift per m/s of CoG velocity (s).
    pub stance_kd: f64,
    /// ZMP sway of the alternating diagonal pairs (m).
    pub trot_sway: f64,
    /// Moment balance used for the ZMP telemetry.
    pub zmp_form: ZmpForm,
}

impl Default for PlantTuning {
    fn default() -> Self {
        Self {
            g: GRAVITY,
            stance_kp: 2.0,
            stance_kd: 0.3,
            trot_sway: 0.01,
            zmp_form: ZmpForm::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// kg
    pub mass: f64,
    /// m
    pub z_g: f64,
    /// m/s^2
    pub g: f64,
    /// Lateral distance from the CoG projection to each foot row (m).
    pub stance_halfwidth: f64,
    pub stance_kp: f64,
    pub stance_kd: f64,
    pub trot_sway: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self::new(&RobotGeometry::default(), &PlantTuning::default())
    }
}

impl PlantParams {
    pub fn new(geom: &RobotGeometry, tuning: &PlantTuning) -> Self {
        Self {
            mass: geom.mass,
            z_g: geom.z_g,
            g: tuning.g,
            stance_halfwidth: geom.stance_halfwidth,
            stance_kp: tuning.stance_kp,
            stance_kd: tuning.stance_kd,
            trot_sway: tuning.trot_sway,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        for (name, v) in [
            ("mass", self.mass),
            ("z_g", self.z_g),
            ("g", self.g),
            ("stance_halfwidth", self.stance_halfwidth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(PlantError::InvalidParam {
                    name,
                    reason: "must be finite and > 0".into(),
                });
            }
        }
        for (name, v) in [
            ("stance_kp", self.stance_kp),
            ("stance_kd", self.stance_kd),
            ("trot_sway", self.trot_sway),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PlantError::InvalidParam {
                    name,
                    reason: "must be finite and >= 0".into(),
                });
            }
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        pendulum_frequency(self.g, self.z_g)
    }

    /// The bare pendulum: no sway, no passive regulation.
    pub fn bare(self) -> Self {
        Self {
            stance_kp: 0.0,
            stance_kd: 0.0,
            trot_sway: 0.0,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub cog: PendulumState,
    /// Foothold of the support line (m).
    pub support_x: f64,
    /// Effective pivot used in the last step (m).
    pub pivot_x: f64,
    pub phase: StancePair,
    /// atan((x - support_x) / z_g), rad.
    pub roll_proxy: f64,
    pub fallen: bool,
    pub t: f64,
}

impl PlantState {
    pub fn at_rest(x: f64, phase: StancePair) -> Self {
        Self {
            cog: PendulumState::new(x, 0.0),
            support_x: x,
            pivot_x: x,
            phase,
            roll_proxy: 0.0,
            fallen: false,
            t: 0.0,
        }
    }
}

/// Inputs for one plant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantInput {
    /// Lateral external force (N).
    pub force: f64,
    /// Diagonal pair in stance during this step.
    pub phase: StancePair,
    /// When a pair has just landed: its mean foot offset from the CoG (m).
    pub landing_offset: Option<f64>,
    /// Extra lateral reach available to the next step (m); 0 without the reflex.
    pub step_reach: f64,
}

fn pivot(p: &PlantParams, support: f64, sign: f64, x: f64, v: f64) -> f64 {
    let hw = p.stance_halfwidth;
    let regulation = (p.stance_kp * (x - support) + p.stance_kd * v).clamp(-hw, hw);
    support + sign * p.trot_sway + regulation
}

/// Whether the state is beyond recovery.
///
/// The plant has fallen once the CoG leaves the foot row and keeps diverging
/// (offset and capture point on the same side, outside the row) faster than
/// the available step reach can follow, or once it has tipped past z_g.
pub fn is_fallen(p: &PlantParams, s: &PlantState, step_reach: f64) -> bool {
    let hw = p.stance_halfwidth;
    let q = p.q();
    let offset = s.cog.x - s.support_x;
    let capture = s.cog.capture_point(q) - s.support_x;
    let diverging = offset.abs() > hw && offset * capture > 0.0 && capture.abs() > hw;
    (diverging && s.cog.xdot.abs() / q > hw + step_reach) || offset.abs() > p.z_g
}

pub fn step_plant(s: &PlantState, p: &PlantParams, u: &PlantInput, dt: f64) -> Result<PlantState, PlantError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(PlantError::InvalidStep(dt));
    }
    if !(s.cog.x.is_finite() && s.cog.xdot.is_finite() && s.support_x.is_finite()) {
        return Err(PlantError::NonFinite(s.t));
    }
    if s.fallen {
        return Ok(PlantState { t: s.t + dt, ..*s });
    }
    let support = match u.landing_offset {
        Some(o) => s.cog.x + o,
        None => s.support_x,
    };
    let sign = u.phase.sign();
    let q2 = p.q() * p.q();
    let f = u.force / p.mass;
    let acc = |x: f64, v: f64| q2 * (x - pivot(p, support, sign, x, v)) + f;
    let (x, v) = (s.cog.x, s.cog.xdot);
    let h = dt;
    let a1 = acc(x, v);
    let a2 = acc(x + h / 2.0 * v, v + h / 2.0 * a1);
    let a3 = acc(x + h / 2.0 * (v + h / 2.0 * a1), v + h / 2.0 * a2);
    let a4 = acc(x + h * (v + h / 2.0 * a2), v + h * a3);
    let nx = x + h * (v + h / 6.0 * (a1 + a2 + a3));
    let nv = v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    let mut out = PlantState {
        cog: PendulumState::new(nx, nv),
        support_x: support,
        pivot_x: pivot(p, support, sign, x, v),
        phase: u.phase,
        roll_proxy: ((nx - support) / p.z_g).atan(),
        fallen: false,
        t: s.t + dt,
    };
    if !(nx.is_finite() && nv.is_finite()) {
        return Err(PlantError::NonFinite(out.t));
    }
    out.fallen = is_fallen(p, &out, u.step_reach);
    Ok(out)
}

/// Finite-difference CoG acceleration in mm/s^2.
pub fn measured_lateral_accel(prev: &PlantState, curr: &PlantState, dt: f64) -> f64 {
    (curr.cog.xdot - prev.cog.xdot) / dt * 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(force: f64) -> PlantInput {
        PlantInput {
            force,
            phase: StancePair::LfRh,
            landing_offset: None,
            step_reach: 0.0,
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let p = PlantParams::default().bare();
        let s = PlantState::at_rest(0.2, StancePair::LfRh);
        let n = step_plant(&s, &p, &input(0.0), 1e-3).unwrap();
        assert_eq!(n.cog, s.cog);
        assert_eq!(n.support_x, 0.2);
    }

    #[test]
    fn impulse_upper_bound() {
        let p = PlantParams::default();
        let mut s = PlantState::at_rest(0.0, StancePair::LfRh);
        for _ in 0..200 {
            s = step_plant(&s, &p, &input(220.0), 1e-3).unwrap();
        }
        assert!(s.cog.xdot > 0.0 && s.cog.xdot < 2.0);
    }

    #[test]
    fn accel_examples() {
        let p = PlantParams::default().bare();
        let s0 = PlantState::at_rest(0.0, StancePair::LfRh);
        let mut s1 = s0;
        s1.cog.x = 0.3;
        assert_eq!(measured_lateral_accel(&s0, &s1, 1e-3), 0.0);
        let s1 = step_plant(&s0, &p, &input(220.0), 1e-6).unwrap();
        assert!((measured_lateral_accel(&s0, &s1, 1e-6) - 10_000.0).abs() < 1e-3);
        let mut off = s0;
        off.cog.x = 0.01;
        let s1 = step_plant(&off, &p, &input(0.0), 1e-6).unwrap();
        assert!((measured_lateral_accel(&off, &s1, 1e-6) - 218.0).abs() < 1e-3);
    }

    #[test]
    fn fallen_latches() {
        let p = PlantParams::default();
        let mut s = PlantState::at_rest(0.0, StancePair::LfRh);
        s.cog.xdot = 3.0;
        let mut seen = false;
        for _ in 0..2000 {
            s = step_plant(&s, &p, &input(0.0), 1e-3).unwrap();
            seen |= s.fallen;
            assert_eq!(s.fallen, seen);
        }
        assert!(seen);
    }

    #[test]
    fn rejects_non_finite() {
        let p = PlantParams::default();
        let mut s = PlantState::at_rest(0.0, StancePair::LfRh);
        assert!(matches!(step_plant(&s, &p, &input(0.0), -1.0), Err(PlantError::InvalidStep(_))));
        s.cog.xdot = f64::INFINITY;
        assert!(matches!(step_plant(&s, &p, &input(0.0), 1e-3), Err(PlantError::NonFinite(_))));
    }

    #[test]
    fn landing_moves_support() {
        let p = PlantParams::default();
        let mut s = PlantState::at_rest(0.0, StancePair::LfRh);
        s.cog.x = 0.05;
        let u = PlantInput {
            landing_offset: Some(0.1),
            ..input(0.0)
        };
        let n = step_plant(&s, &p, &u, 1e-3).unwrap();
        assert!((n.support_x - 0.15).abs() < 1e-15);
    }
}
