//! Hopf oscillators and the extended eight-unit trot network.
//!
//! Units 0..4 drive the hip joints of the legs LF, RF, RH, LH. Units 4..8
//! drive the laterally movable (LM) joints of the same legs and are only
//! integrated while enabled. A disabled unit sits exactly at the origin and
//! contributes nothing to any coupling sum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::rk4_step;

pub const NUM_LEGS: usize = 4;
pub const NUM_UNITS: usize = 2 * NUM_LEGS;

/// Minimum number of complete cycles [`duty_fraction`] accepts.
pub const MIN_DUTY_CYCLES: usize = 5;

/// Initial |x| of the hip units; the origin is an unstable equilibrium.
pub const HIP_SEED: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpgError {
    #[error("invalid oscillator parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("invalid coupling matrix: {0}")]
    InvalidCoupling(String),
    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("non-finite state in oscillator unit {unit} at t = {t} s")]
    NonFinite { unit: usize, t: f64 },
    #[error("phase undefined: radius {radius:.3e} is below {threshold:.3e}")]
    UndefinedPhase { radius: f64, threshold: f64 },
    #[error("insufficient data: {cycles} complete cycles, need at least {required}")]
    InsufficientData { cycles: usize, required: usize },
}

/// Leg numbering used throughout the crate (oscillators 1-4 in the network).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    LeftFore,
    RightFore,
    RightHind,
    LeftHind,
}

impl Leg {
    pub const ALL: [Leg; NUM_LEGS] = [Leg::LeftFore, Leg::RightFore, Leg::RightHind, Leg::LeftHind];

    pub fn index(self) -> usize {
        match self {
            Leg::LeftFore => 0,
            Leg::RightFore => 1,
            Leg::RightHind => 2,
            Leg::LeftHind => 3,
        }
    }

    pub fn is_fore(self) -> bool {
        matches!(self, Leg::LeftFore | Leg::RightFore)
    }

    /// Lateral side in world coordinates: left legs sit at negative x.
    pub fn lateral_side(self) -> f64 {
        match self {
            Leg::LeftFore | Leg::LeftHind => -1.0,
            Leg::RightFore | Leg::RightHind => 1.0,
        }
    }

    pub fn longitudinal_side(self) -> f64 {
        if self.is_fore() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn pair(self) -> StancePair {
        match self {
            Leg::LeftFore | Leg::RightHind => StancePair::LfRh,
            Leg::RightFore | Leg::LeftHind => StancePair::RfLh,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Leg::LeftFore => "lf",
            Leg::RightFore => "rf",
            Leg::RightHind => "rh",
            Leg::LeftHind => "lh",
        }
    }
}

/// One of the two diagonal leg pairs of a trot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StancePair {
    /// Legs 1 and 3.
    LfRh,
    /// Legs 2 and 4.
    RfLh,
}

impl StancePair {
    pub fn legs(self) -> [Leg; 2] {
        match self {
            StancePair::LfRh => [Leg::LeftFore, Leg::RightHind],
            StancePair::RfLh => [Leg::RightFore, Leg::LeftHind],
        }
    }

    pub fn other(self) -> StancePair {
        match self {
            StancePair::LfRh => StancePair::RfLh,
            StancePair::RfLh => StancePair::LfRh,
        }
    }

    /// +1 for legs 1-3, -1 for legs 2-4.
    pub fn sign(self) -> f64 {
        match self {
            StancePair::LfRh => 1.0,
            StancePair::RfLh => -1.0,
        }
    }
}

/// Parameters shared by every Hopf unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatorParams {
    /// Convergence rate of x (1/s).
    pub a: f64,
    /// Convergence rate of y (1/s).
    pub b: f64,
    /// Squared limit-cycle amplitude (rad^2).
    pub mu: f64,
    /// Steepness of the stance/swing frequency blend (1/rad).
    pub tau: f64,
    /// Duty ratio, the stance share of the cycle.
    pub beta: f64,
    /// Swing-phase angular frequency (rad/s).
    pub omega_sw: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            a: 50.0,
            b: 50.0,
            mu: 1.0,
            tau: 50.0,
            beta: 0.5,
            omega_sw: PI / 0.3,
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<(), CpgError> {
        fn bad(name: &'static str, reason: &str) -> Result<(), CpgError> {
            Err(CpgError::InvalidParam {
                name,
                reason: reason.to_string(),
            })
        }
        let all = [self.a, self.b, self.mu, self.tau, self.beta, self.omega_sw];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("oscillator", "all parameters must be finite");
        }
        if self.a <= 0.0 {
            return bad("a", "must be > 0");
        }
        if self.b <= 0.0 {
            return bad("b", "must be > 0");
        }
        if self.mu < 0.0 {
            return bad("mu", "must be >= 0");
        }
        if self.tau <= 0.0 {
            return bad("tau", "must be > 0");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta", "must lie strictly between 0 and 1");
        }
        if self.omega_sw <= 0.0 {
            return bad("omega_sw", "must be > 0");
        }
        Ok(())
    }

    /// Stance-phase frequency, always derived from the duty ratio.
    pub fn omega_st(&self) -> f64 {
        (1.0 - self.beta) / self.beta * self.omega_sw
    }

    /// Limit-cycle amplitude sqrt(mu).
    pub fn amplitude(&self) -> f64 {
        self.mu.sqrt()
    }

    /// Period of the converged, uncoupled limit cycle (s).
    pub fn period(&self) -> f64 {
        PI / self.omega_sw + PI / self.omega_st()
    }

    /// Frequency blend between the stance branch (y > 0) and swing branch (y < 0).
    pub fn instantaneous_frequency(&self, y: f64) -> f64 {
        let ty = self.tau * y;
        // exp overflow gives +inf and the corresponding term vanishes, which is the limit.
        self.omega_st() / ((-ty).exp() + 1.0) + self.omega_sw / (ty.exp() + 1.0)
    }
}

/// Free function form of [`OscillatorParams::instantaneous_frequency`].
pub fn instantaneous_frequency(params: &OscillatorParams, y: f64) -> f64 {
    params.instantaneous_frequency(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OscillatorState {
    pub x: f64,
    pub y: f64,
    pub enabled: bool,
}

impl OscillatorState {
    pub fn enabled_at(x: f64, y: f64) -> Self {
        Self { x, y, enabled: true }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// The hip block of the gait matrix: legs 1,3 and 2,4 in phase, the two groups in anti-phase.
pub const TROT_HIP_COUPLING: [[f64; NUM_LEGS]; NUM_LEGS] = [
    [0.0, -1.0, 1.0, -1.0],
    [-1.0, 0.0, -1.0, 1.0],
    [1.0, -1.0, 0.0, -1.0],
    [-1.0, 1.0, -1.0, 0.0],
];

type Block = [[f64; NUM_LEGS]; NUM_LEGS];

/// 8x8 connection weights; row i holds the weights of the inputs to unit i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    k: [[f64; NUM_UNITS]; NUM_UNITS],
}

impl CouplingMatrix {
    pub fn zero() -> Self {
        Self {
            k: [[0.0; NUM_UNITS]; NUM_UNITS],
        }
    }

    /// Assembles `[[k_t, k_ct], [k_tc, k_cc]]`.
    pub fn from_blocks(k_t: Block, k_ct: Block, k_tc: Block, k_cc: Block) -> Result<Self, CpgError> {
        let mut k = [[0.0; NUM_UNITS]; NUM_UNITS];
        for i in 0..NUM_LEGS {
            for j in 0..NUM_LEGS {
                k[i][j] = k_t[i][j];
                k[i][j + NUM_LEGS] = k_ct[i][j];
                k[i + NUM_LEGS][j] = k_tc[i][j];
                k[i + NUM_LEGS][j + NUM_LEGS] = k_cc[i][j];
            }
        }
        let m = Self { k };
        m.validate()?;
        Ok(m)
    }

    /// The extended trot gait matrix `[[K_t, 0], [lambda I, 0]]`.
    pub fn extended_trot(lambda: f64) -> Result<Self, CpgError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(CpgError::InvalidCoupling(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let mut k_tc = [[0.0; NUM_LEGS]; NUM_LEGS];
        for (i, row) in k_tc.iter_mut().enumerate() {
            row[i] = lambda;
        }
        Self::from_blocks(TROT_HIP_COUPLING, [[0.0; 4]; 4], k_tc, [[0.0; 4]; 4])
    }

    pub fn validate(&self) -> Result<(), CpgError> {
        for i in 0..NUM_UNITS {
            if self.k[i][i] != 0.0 {
                return Err(CpgError::InvalidCoupling(format!(
                    "diagonal entry ({i}, {i}) is {} but must be 0",
                    self.k[i][i]
                )));
            }
            if self.k[i].iter().any(|v| !v.is_finite()) {
                return Err(CpgError::InvalidCoupling(format!("row {i} has a non-finite weight")));
            }
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i][j]
    }

    pub fn rows(&self) -> &[[f64; NUM_UNITS]; NUM_UNITS] {
        &self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub units: [OscillatorState; NUM_UNITS],
    pub t: f64,
}

impl Default for NetworkState {
    fn default() -> Self {
        Self::new()
    }
}

impl NetworkState {
    /// Hip units seeded at (+-0.01, 0) in the trot pattern, LM units disabled.
    pub fn new() -> Self {
        let mut units = [OscillatorState::default(); NUM_UNITS];
        for leg in Leg::ALL {
            units[leg.index()] = OscillatorState::enabled_at(leg.pair().sign() * HIP_SEED, 0.0);
        }
        Self { units, t: 0.0 }
    }

    /// Hip units at the given (x, y) seeds, LM units disabled.
    pub fn with_hip_seeds(seeds: [(f64, f64); NUM_LEGS]) -> Self {
        let mut units = [OscillatorState::default(); NUM_UNITS];
        for (unit, (x, y)) in units.iter_mut().zip(seeds) {
            *unit = OscillatorState::enabled_at(x, y);
        }
        Self { units, t: 0.0 }
    }

    pub fn hip(&self, leg: Leg) -> &OscillatorState {
        &self.units[leg.index()]
    }

    pub fn lm(&self, leg: Leg) -> &OscillatorState {
        &self.units[leg.index() + NUM_LEGS]
    }

    pub fn lm_enabled(&self) -> bool {
        self.units[NUM_LEGS..].iter().any(|u| u.enabled)
    }

    /// The diagonal pair in stance: leg 1 stands while its y output is positive.
    pub fn stance_pair(&self) -> StancePair {
        if self.units[0].y > 0.0 {
            StancePair::LfRh
        } else {
            StancePair::RfLh
        }
    }

    fn check_finite(&self) -> Result<(), CpgError> {
        for (unit, u) in self.units.iter().enumerate() {
            if !(u.x.is_finite() && u.y.is_finite()) {
                return Err(CpgError::NonFinite { unit, t: self.t });
            }
        }
        Ok(())
    }
}

fn network_derivative(
    s: &[f64; 2 * NUM_UNITS],
    enabled: &[bool; NUM_UNITS],
    params: &OscillatorParams,
    k: &CouplingMatrix,
) -> [f64; 2 * NUM_UNITS] {
    let mut d = [0.0; 2 * NUM_UNITS];
    for i in 0..NUM_UNITS {
        if !enabled[i] {
            continue;
        }
        let (x, y) = (s[2 * i], s[2 * i + 1]);
        let r2 = x * x + y * y;
        let omega = params.instantaneous_frequency(y);
        let coupling: f64 = (0..NUM_UNITS)
            .filter(|&j| enabled[j])
            .map(|j| k.k[i][j] * s[2 * j + 1])
            .sum();
        d[2 * i] = params.a * (params.mu - r2) * x - omega * y;
        d[2 * i + 1] = params.b * (params.mu - r2) * y + omega * x + coupling;
    }
    d
}

/// Advances every enabled unit by one RK4 step of the coupled system.
pub fn step_network(
    state: &NetworkState,
    params: &OscillatorParams,
    k: &CouplingMatrix,
    dt: f64,
) -> Result<NetworkState, CpgError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CpgError::InvalidStep(dt));
    }
    state.check_finite()?;
    let enabled = state.units.map(|u| u.enabled);
    let mut packed = [0.0; 2 * NUM_UNITS];
    for (i, u) in state.units.iter().enumerate() {
        if u.enabled {
            packed[2 * i] = u.x;
            packed[2 * i + 1] = u.y;
        }
    }
    let next = rk4_step(|_, s| network_derivative(s, &enabled, params, k), state.t, &packed, dt);
    let mut out = *state;
    out.t = state.t + dt;
    for (i, u) in out.units.iter_mut().enumerate() {
        if u.enabled {
            u.x = next[2 * i];
            u.y = next[2 * i + 1];
        } else {
            u.x = 0.0;
            u.y = 0.0;
        }
    }
    out.check_finite()?;
    Ok(out)
}

/// Switches the LM units on at exactly (0, 0). Already-enabled units are left untouched.
pub fn enable_lm_units(state: &NetworkState) -> NetworkState {
    let mut out = *state;
    for u in out.units[NUM_LEGS..].iter_mut() {
        if !u.enabled {
            *u = OscillatorState::enabled_at(0.0, 0.0);
        }
    }
    out
}

/// Switches the LM units off and parks them at the origin.
pub fn disable_lm_units(state: &NetworkState) -> NetworkState {
    let mut out = *state;
    for u in out.units[NUM_LEGS..].iter_mut() {
        *u = OscillatorState::default();
    }
    out
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    if w <= -PI {
        w + 2.0 * PI
    } else if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Phase of a unit, `atan2(y, x)` wrapped to (-pi, pi].
///
/// Fails when the unit is within `0.1 * sqrt(mu)` of the origin.
pub fn phase_of(unit: &OscillatorState, mu: f64) -> Result<f64, CpgError> {
    let threshold = 0.1 * mu.sqrt();
    let radius = unit.radius();
    if !unit.enabled || !(radius > threshold) {
        return Err(CpgError::UndefinedPhase { radius, threshold });
    }
    Ok(wrap_angle(unit.y.atan2(unit.x)))
}

/// Fraction of samples with y > 0 over the complete cycles of `trace`.
///
/// Cycles are delimited by upward zero crossings; samples before the first
/// and after the last crossing are discarded so only whole cycles count.
pub fn duty_fraction(trace: &[f64]) -> Result<f64, CpgError> {
    let crossings: Vec<usize> = trace
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] <= 0.0 && w[1] > 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    let cycles = crossings.len().saturating_sub(1);
    if cycles < MIN_DUTY_CYCLES {
        return Err(CpgError::InsufficientData {
            cycles,
            required: MIN_DUTY_CYCLES,
        });
    }
    let window = &trace[crossings[0]..*crossings.last().unwrap()];
    let stance = window.iter().filter(|&&y| y > 0.0).count();
    Ok(stance as f64 / window.len() as f64)
}

/// Largest LM-hip phase error over the four legs, with the leg it occurs on.
pub fn lm_phase_error(state: &NetworkState, mu: f64) -> Result<(Leg, f64), CpgError> {
    let mut worst = (Leg::LeftFore, 0.0);
    for leg in Leg::ALL {
        let e = wrap_angle(phase_of(state.lm(leg), mu)? - phase_of(state.hip(leg), mu)?).abs();
        if e > worst.1 {
            worst = (leg, e);
        }
    }
    Ok(worst)
}

/// LM-hip phase error after enabling the LM units of a trotting network at `t_enable`.
///
/// Returns `(time since enable, error)` per step over `horizon` seconds; an
/// LM unit still too close to the origin to have a phase counts as error pi.
pub fn lock_in_trace(
    params: &OscillatorParams,
    lambda: f64,
    t_enable: f64,
    horizon: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>, CpgError> {
    params.validate()?;
    let k = CouplingMatrix::extended_trot(lambda)?;
    let mut s = NetworkState::new();
    for _ in 0..(t_enable / dt).round() as usize {
        s = step_network(&s, params, &k, dt)?;
    }
    s = enable_lm_units(&s);
    let steps = (horizon / dt).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for i in 1..=steps {
        s = step_network(&s, params, &k, dt)?;
        let e = match lm_phase_error(&s, params.mu) {
            Ok((_, e)) => e,
            Err(CpgError::UndefinedPhase { .. }) => PI,
            Err(e) => return Err(e),
        };
        out.push((i as f64 * dt, e));
    }
    Ok(out)
}

/// Time after which the error stays below `tolerance` for the rest of the trace.
pub fn lock_time(trace: &[(f64, f64)], tolerance: f64) -> Option<f64> {
    match trace.iter().rposition(|&(_, e)| !(e < tolerance)) {
        None => Some(0.0),
        Some(i) if i + 1 < trace.len() => Some(trace[i].0),
        Some(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frequency_is_constant_at_half_duty() {
        let p = OscillatorParams::default();
        for y in [-3.0, -0.1, 0.0, 0.2, 7.0] {
            assert!(close(p.instantaneous_frequency(y), p.omega_sw, 1e-12));
        }
    }

    #[test]
    fn frequency_at_zero_is_branch_mean() {
        let p = OscillatorParams {
            beta: 0.3,
            ..Default::default()
        };
        let mean = 0.5 * (p.omega_st() + p.omega_sw);
        assert!(close(p.instantaneous_frequency(0.0), mean, 1e-12));
    }

    #[test]
    fn frequency_limit_toward_stance_branch() {
        let p = OscillatorParams {
            beta: 0.25,
            omega_sw: 10.0,
            tau: 50.0,
            ..Default::default()
        };
        // 30/(e^-500 + 1) + 10/(e^500 + 1) == 30 to double precision.
        assert!(close(p.instantaneous_frequency(10.0), 30.0, 1e-12));
        assert!(close(p.instantaneous_frequency(-10.0), 10.0, 1e-12));
        assert!(p.instantaneous_frequency(1e6).is_finite());
        assert!(p.instantaneous_frequency(-1e6).is_finite());
    }

    #[test]
    fn rejects_bad_params() {
        let p = OscillatorParams {
            beta: 1.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(CpgError::InvalidParam { name: "beta", .. })));
        let p = OscillatorParams {
            a: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(OscillatorParams::default().validate().is_ok());
    }

    #[test]
    fn gait_matrix_blocks() {
        let k = CouplingMatrix::extended_trot(4.0).unwrap();
        for (i, row) in TROT_HIP_COUPLING.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert_eq!(k.get(i, j), w);
                assert_eq!(k.get(i, j + 4), 0.0);
                assert_eq!(k.get(i + 4, j), if i == j { 4.0 } else { 0.0 });
                assert_eq!(k.get(i + 4, j + 4), 0.0);
            }
        }
        assert!(CouplingMatrix::extended_trot(-1.0).is_err());
        let mut kt = TROT_HIP_COUPLING;
        kt[2][2] = 1.0;
        assert!(CouplingMatrix::from_blocks(kt, [[0.0; 4]; 4], [[0.0; 4]; 4], [[0.0; 4]; 4]).is_err());
    }

    #[test]
    fn all_disabled_origin_is_fixed() {
        let s = NetworkState {
            units: [OscillatorState::default(); NUM_UNITS],
            t: 0.0,
        };
        let k = CouplingMatrix::extended_trot(4.0).unwrap();
        let n = step_network(&s, &OscillatorParams::default(), &k, 1e-3).unwrap();
        assert_eq!(n.units, s.units);
    }

    #[test]
    fn rejects_non_finite_and_bad_step() {
        let mut s = NetworkState::new();
        let k = CouplingMatrix::extended_trot(4.0).unwrap();
        let p = OscillatorParams::default();
        assert!(matches!(step_network(&s, &p, &k, 0.0), Err(CpgError::InvalidStep(_))));
        s.units[2].y = f64::NAN;
        assert!(matches!(step_network(&s, &p, &k, 1e-3), Err(CpgError::NonFinite { unit: 2, .. })));
    }

    #[test]
    fn enable_is_idempotent() {
        let s = enable_lm_units(&NetworkState::new());
        assert!(s.units[4..].iter().all(|u| u.enabled && u.x == 0.0 && u.y == 0.0));
        let mut moved = s;
        moved.units[5].x = 0.3;
        assert_eq!(enable_lm_units(&moved), moved);
        let off = disable_lm_units(&moved);
        assert!(off.units[4..].iter().all(|u| !u.enabled && u.x == 0.0 && u.y == 0.0));
    }

    #[test]
    fn phase_examples() {
        let u = |x, y| OscillatorState::enabled_at(x, y);
        assert_eq!(phase_of(&u(1.0, 0.0), 1.0).unwrap(), 0.0);
        assert!(close(phase_of(&u(0.0, 1.0), 1.0).unwrap(), PI / 2.0, 1e-15));
        assert!(close(phase_of(&u(-0.5, -0.5), 1.0).unwrap(), -3.0 * PI / 4.0, 1e-15));
        assert!(close(phase_of(&u(-1.0, 0.0), 1.0).unwrap(), PI, 1e-15));
        assert!(matches!(phase_of(&u(0.05, 0.0), 1.0), Err(CpgError::UndefinedPhase { .. })));
        assert!(phase_of(&OscillatorState::default(), 1.0).is_err());
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(-PI), PI);
        assert!(close(wrap_angle(3.0 * PI), PI, 1e-12));
        assert!(close(wrap_angle(2.0 * PI + 0.25), 0.25, 1e-12));
        assert!(close(wrap_angle(-2.0 * PI - 0.25), -0.25, 1e-12));
    }

    #[test]
    fn duty_fraction_needs_cycles() {
        assert!(matches!(
            duty_fraction(&[0.0; 1000]),
            Err(CpgError::InsufficientData { cycles: 0, .. })
        ));
        let square: Vec<f64> = (0..1000).map(|i| if (i / 50) % 2 == 0 { -1.0 } else { 1.0 }).collect();
        assert!(close(duty_fraction(&square).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn lock_time_examples() {
        let tr = [(0.1, 1.0), (0.2, 0.05), (0.3, 0.2), (0.4, 0.01), (0.5, 0.02)];
        assert_eq!(lock_time(&tr, 0.1), Some(0.3));
        assert_eq!(lock_time(&tr[..3], 0.1), None);
        assert_eq!(lock_time(&tr[3..], 0.1), Some(0.0));
    }

    #[test]
    fn stance_pair_follows_leg_one() {
        let mut s = NetworkState::new();
        s.units[0].y = 0.2;
        assert_eq!(s.stance_pair(), StancePair::LfRh);
        s.units[0].y = -0.2;
        assert_eq!(s.stance_pair(), StancePair::RfLh);
    }
}
