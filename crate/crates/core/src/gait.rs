//! Mapping from oscillator outputs to hip, knee and LM slider commands.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpg::Leg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaitError {
    #[error("invalid gait parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("nominal hip amplitude must be > 0, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("required lift {h_c:.4} m is out of leg reach (arccos argument {arg:.4})")]
    GeometryInfeasible { h_c: f64, arg: f64 },
}

fn invalid(name: &'static str, reason: &str) -> GaitError {
    GaitError::InvalidParam {
        name,
        reason: reason.to_string(),
    }
}

/// Leg and body dimensions of the robot.
///
/// `theta` is the rest angle of the thigh from the vertical and `gamma` the
/// rest offset of the knee; the knee amplitude adds to `gamma` when folding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotGeometry {
    /// Hip-to-ground effective leg length (m).
    pub d: f64,
    /// Thigh length (m).
    pub l_h: f64,
    /// Shank length (m).
    pub l_k: f64,
    /// Thigh rest angle (rad).
    pub theta: f64,
    /// Knee rest offset angle (rad).
    pub gamma: f64,
    /// Foot displacement per unit slider travel, fore legs.
    pub fore_ratio: f64,
    /// Foot displacement per unit slider travel, hind legs.
    pub hind_ratio: f64,
    /// Total mass (kg).
    pub mass: f64,
    /// CoG height (m).
    pub z_g: f64,
    /// Lateral distance from the CoG projection to each foot row (m).
    pub stance_halfwidth: f64,
    /// Mechanical slider travel limit (m).
    pub max_slider: f64,
    /// Longitudinal distance between fore and hind hips (m).
    pub hip_spacing: f64,
    /// Foot contact radius used for interference checks (m).
    pub foot_radius: f64,
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self {
            d: 0.4,
            l_h: 0.2,
            l_k: 0.25,
            theta: 0.3,
            gamma: 0.2,
            fore_ratio: 5.5,
            hind_ratio: 6.08,
            mass: 22.0,
            z_g: 0.45,
            stance_halfwidth: 0.15,
            max_slider: 0.05,
            hip_spacing: 0.4,
            foot_radius: 0.02,
        }
    }
}

impl RobotGeometry {
    pub fn validate(&self) -> Result<(), GaitError> {
        let positive = [
            ("d", self.d),
            ("l_h", self.l_h),
            ("l_k", self.l_k),
            ("fore_ratio", self.fore_ratio),
            ("hind_ratio", self.hind_ratio),
            ("mass", self.mass),
            ("z_g", self.z_g),
            ("stance_halfwidth", self.stance_halfwidth),
            ("max_slider", self.max_slider),
            ("hip_spacing", self.hip_spacing),
            ("foot_radius", self.foot_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.theta > 0.0 && self.theta < half_pi) {
            return Err(invalid("theta", "must lie in (0, pi/2)"));
        }
        if !(self.gamma > 0.0 && self.gamma < half_pi) {
            return Err(invalid("gamma", "must lie in (0, pi/2)"));
        }
        Ok(())
    }

    pub fn ratio(&self, leg: Leg) -> f64 {
        if leg.is_fore() {
            self.fore_ratio
        } else {
            self.hind_ratio
        }
    }

    /// Largest lateral foot displacement the sliders can produce on every leg (m).
    pub fn max_foot_reach(&self) -> f64 {
        self.fore_ratio.min(self.hind_ratio) * self.max_slider
    }

    /// Distance from the diagonal support line to a swing foot (m), the lever
    /// arm turning body roll into foot descent.
    pub fn support_lever(&self) -> f64 {
        let w = 2.0 * self.stance_halfwidth;
        let l = self.hip_spacing;
        w * l / w.hypot(l)
    }
}

/// Amplitude settings of the longitudinal trot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmplitudeConfig {
    /// Nominal squared oscillator amplitude (rad^2).
    pub mu0: f64,
    /// Minimum hip amplitude (rad).
    pub a_h_min: f64,
    /// Nominal hip amplitude (rad).
    pub a_h0: f64,
    /// Nominal knee amplitude (rad).
    pub a_k0: f64,
    /// Swing duration (s).
    pub t_sw: f64,
    /// +1 for elbow-type, -1 for knee-type legs.
    pub sign: f64,
}

impl Default for AmplitudeConfig {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            a_h_min: 0.174,
            a_h0: hip_amplitude(0.5, 0.6, RobotGeometry::default().d),
            a_k0: 0.5,
            t_sw: 0.3,
            sign: 1.0,
        }
    }
}

impl AmplitudeConfig {
    pub fn validate(&self) -> Result<(), GaitError> {
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return Err(invalid("mu0", "must be finite and > 0"));
        }
        if !(self.a_h_min.is_finite() && self.a_h_min >= 0.0) {
            return Err(invalid("a_h_min", "must be finite and >= 0"));
        }
        if !(self.a_h0.is_finite() && self.a_h0 > 0.0) {
            return Err(GaitError::NonPositiveAmplitude(self.a_h0));
        }
        if !(self.a_k0.is_finite() && self.a_k0 >= 0.0) {
            return Err(invalid("a_k0", "must be finite and >= 0"));
        }
        if !(self.t_sw.is_finite() && self.t_sw > 0.0) {
            return Err(invalid("t_sw", "must be finite and > 0"));
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(invalid("sign", "must be +1 or -1"));
        }
        Ok(())
    }

    /// Hip amplitude actually produced once `mu` has been adapted.
    pub fn effective_hip_amplitude(&self) -> f64 {
        self.a_h0.max(self.a_h_min)
    }

    /// Converts a raw oscillator output to a hip angle (rad).
    pub fn hip_scale(&self) -> f64 {
        self.a_h0 / self.mu0.sqrt()
    }
}

/// Commands for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointCommand {
    pub hip: f64,
    pub knee: f64,
    pub slider: f64,
}

/// Hip swing amplitude for forward speed `v` and gait period `period`.
pub fn hip_amplitude(v: f64, period: f64, d: f64) -> f64 {
    let stride = v * period / 2.0;
    (stride / 2.0 / d).atan()
}

/// Raises `mu` so the hip amplitude never drops below `a_h_min`.
pub fn adapt_mu(cfg: &AmplitudeConfig) -> Result<f64, GaitError> {
    if !(cfg.a_h0 > 0.0) {
        return Err(GaitError::NonPositiveAmplitude(cfg.a_h0));
    }
    if cfg.a_h0 < cfg.a_h_min {
        let r = cfg.a_h_min / cfg.a_h0;
        Ok(cfg.mu0 * r * r)
    } else {
        Ok(cfg.mu0)
    }
}

/// Extra foot clearance needed because the body rolls during swing.
///
/// Negative roll acceleration rolls the body away from the swing foot and
/// needs no extra lift.
pub fn min_lift_height(roll_accel: f64, t_sw: f64, l_c: f64) -> f64 {
    0.5 * roll_accel.max(0.0) * t_sw * t_sw * l_c
}

/// Minimum knee amplitude that lifts the foot by `h_c` at hip amplitude `a_h`.
pub fn min_knee_amplitude(h_c: f64, a_h: f64, geom: &RobotGeometry) -> Result<f64, GaitError> {
    let arg = (geom.d * a_h.cos() - geom.l_h * geom.theta.cos() - h_c) / geom.l_k;
    if !(-1.0..=1.0).contains(&arg) {
        return Err(GaitError::GeometryInfeasible { h_c, arg });
    }
    Ok(arg.acos() - geom.gamma)
}

/// Foot lift produced by knee amplitude `a_k`; the inverse of [`min_knee_amplitude`].
pub fn lift_height(a_k: f64, a_h: f64, geom: &RobotGeometry) -> f64 {
    geom.d * a_h.cos() - geom.l_h * geom.theta.cos() - geom.l_k * (a_k + geom.gamma).cos()
}

/// Knee amplitude `max(A_kmin, A_k0)` for the required lift.
pub fn knee_amplitude(h_c: f64, a_h: f64, cfg: &AmplitudeConfig, geom: &RobotGeometry) -> Result<f64, GaitError> {
    Ok(min_knee_amplitude(h_c, a_h, geom)?.max(cfg.a_k0))
}

/// Knee angle from the hip-scaled y output: active in swing (y <= 0), zero in stance.
pub fn knee_signal(y: f64, a_k: f64, a_h: f64, sign: f64) -> f64 {
    if y <= 0.0 {
        sign * (a_k / a_h) * y
    } else {
        0.0
    }
}

pub fn slider_to_foot(x_l: f64, leg: Leg, geom: &RobotGeometry) -> f64 {
    geom.ratio(leg) * x_l
}

/// Slider position for a foot displacement, clamped to the travel limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliderTarget {
    pub slider: f64,
    pub clamped: bool,
}

pub fn foot_to_slider(foot: f64, leg: Leg, geom: &RobotGeometry) -> SliderTarget {
    let raw = foot / geom.ratio(leg);
    if raw.abs() > geom.max_slider {
        SliderTarget {
            slider: geom.max_slider.copysign(raw),
            clamped: true,
        }
    } else {
        SliderTarget {
            slider: raw,
            clamped: false,
        }
    }
}

/// Flags sign changes of a signal; zero counts as non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZeroCrossing {
    prev_positive: Option<bool>,
}

impl ZeroCrossing {
    pub fn new(initial: f64) -> Self {
        Self {
            prev_positive: Some(initial > 0.0),
        }
    }

    pub fn update(&mut self, value: f64) -> bool {
        let positive = value > 0.0;
        let crossed = self.prev_positive.is_some_and(|p| p != positive);
        self.prev_positive = Some(positive);
        crossed
    }
}

/// Value register whose pending update only takes effect at a zero crossing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Latched {
    pub current: f64,
    pub pending: Option<f64>,
}

impl Latched {
    pub fn new(value: f64) -> Self {
        Self {
            current: value,
            pending: None,
        }
    }

    pub fn set_pending(&mut self, value: f64) {
        self.pending = Some(value);
    }

    /// Applies the pending value when `crossed`; returns whether it changed.
    pub fn flush(&mut self, crossed: bool) -> bool {
        match (crossed, self.pending.take()) {
            (true, Some(v)) => {
                self.current = v;
                true
            }
            (false, p) => {
                self.pending = p;
                false
            }
            (true, None) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hip_amplitude_examples() {
        assert_eq!(hip_amplitude(0.0, 0.6, 0.4), 0.0);
        assert!((hip_amplitude(0.5, 0.6, 0.4) - 0.185_347_949_995_694_7).abs() < 1e-14);
        let v = 4.0 * 0.4 / 0.6;
        assert!((hip_amplitude(v, 0.6, 0.4) - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn adapt_mu_examples() {
        let base = AmplitudeConfig::default();
        let c = AmplitudeConfig { a_h0: 0.2, ..base };
        assert_eq!(adapt_mu(&c).unwrap(), 1.0);
        let c = AmplitudeConfig { a_h0: 0.174, ..base };
        assert_eq!(adapt_mu(&c).unwrap(), 1.0);
        let c = AmplitudeConfig { a_h0: 0.1, ..base };
        assert!((adapt_mu(&c).unwrap() - 3.0276).abs() < 1e-12);
        let c = AmplitudeConfig { a_h0: 0.0, ..base };
        assert!(matches!(adapt_mu(&c), Err(GaitError::NonPositiveAmplitude(_))));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(min_lift_height(0.0, 0.3, 0.5), 0.0);
        assert!((min_lift_height(2.0, 0.3, 0.5) - 0.045).abs() < 1e-15);
        assert_eq!(min_lift_height(-1.0, 0.3, 0.5), 0.0);
    }

    #[test]
    fn knee_amplitude_examples() {
        let g = RobotGeometry::default();
        let a_k = min_knee_amplitude(0.045, 0.185, &g).unwrap();
        assert!((a_k - 0.691_264_637_170_718_2).abs() < 1e-12, "{a_k}");
        let h_unit = g.d * 0.185f64.cos() - g.l_h * g.theta.cos() - g.l_k;
        assert!((min_knee_amplitude(h_unit, 0.185, &g).unwrap() + g.gamma).abs() < 1e-7);
        assert!(matches!(
            min_knee_amplitude(1.0, 0.185, &g),
            Err(GaitError::GeometryInfeasible { .. })
        ));
        let a = min_knee_amplitude(0.03, 0.2, &g).unwrap();
        assert!((lift_height(a, 0.2, &g) - 0.03).abs() < 1e-12);
    }

    #[test]
    fn knee_signal_examples() {
        assert_eq!(knee_signal(0.4, 0.6, 0.3, 1.0), 0.0);
        assert!((knee_signal(-0.1, 0.6, 0.3, 1.0) + 0.2).abs() < 1e-15);
        assert_eq!(knee_signal(-0.1, 0.6, 0.3, -1.0), -knee_signal(-0.1, 0.6, 0.3, 1.0));
    }

    #[test]
    fn slider_examples() {
        let g = RobotGeometry::default();
        assert!((slider_to_foot(0.001, Leg::LeftFore, &g) - 0.0055).abs() < 1e-15);
        assert!((slider_to_foot(0.002, Leg::RightHind, &g) - 0.01216).abs() < 1e-15);
        assert_eq!(foot_to_slider(0.0, Leg::LeftHind, &g).slider, 0.0);
        let t = foot_to_slider(-1.0, Leg::RightFore, &g);
        assert!(t.clamped);
        assert_eq!(t.slider, -g.max_slider);
    }

    #[test]
    fn latch_applies_only_on_crossing() {
        let mut z = ZeroCrossing::new(0.5);
        let mut l = Latched::new(1.0);
        l.set_pending(2.0);
        assert!(!l.flush(z.update(0.2)));
        assert_eq!(l.current, 1.0);
        assert!(l.flush(z.update(-0.1)));
        assert_eq!(l.current, 2.0);
        assert!(!l.flush(z.update(0.3)));
    }

    #[test]
    fn default_configs_valid() {
        RobotGeometry::default().validate().unwrap();
        AmplitudeConfig::default().validate().unwrap();
        let g = RobotGeometry {
            theta: 2.0,
            ..Default::default()
        };
        assert!(g.validate().is_err());
    }
}
