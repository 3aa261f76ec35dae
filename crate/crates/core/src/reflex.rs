//! Lateral stepping reflex and the closed sense-filter-decide-act loop.
//!
//! While `Idle` the robot trots with the LM units off and every landing pair
//! touches down under the body. When the filtered lateral acceleration
//! exceeds the threshold the LM units are enabled and each leg's slider
//! amplitude is planned onto the capture point of the pendulum. Plans are
//! refreshed at every hip zero crossing and the reflex ends at the first
//! stance-pair transition where the filtered acceleration is back within
//! the threshold.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpg::{
    self, disable_lm_units, enable_lm_units, lm_phase_error, step_network, CouplingMatrix, CpgError, Leg,
    NetworkState, OscillatorParams, OscillatorState, StancePair,
};
use crate::filter::FilterState;
use crate::gait::{
    adapt_mu, knee_amplitude, knee_signal, lift_height, min_lift_height, AmplitudeConfig, GaitError, JointCommand,
    RobotGeometry, ZeroCrossing,
};
use crate::plant::{
    force_at, measured_lateral_accel, step_plant, Disturbance, PlantError, PlantInput, PlantParams, PlantState,
    PlantTuning,
};
use crate::zmp::{compute_zmp_x, plan_step, propagate_cog, BodySegment, PendulumState, ZmpError};

/// Walking-frequency cutoff of the acceleration filter (Hz).
pub const FILTER_CUTOFF_HZ: f64 = 1.67;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReflexError {
    #[error("invalid reflex parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("step direction undefined for zero acceleration")]
    ZeroAcceleration,
    #[error(transparent)]
    Cpg(#[from] CpgError),
    #[error(transparent)]
    Gait(#[from] GaitError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Zmp(#[from] ZmpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReflexConfig {
    /// Trigger level on the filtered lateral acceleration (mm/s^2).
    pub threshold: f64,
    /// Hip-to-LM coupling gain.
    pub lambda: f64,
    /// Steps after which an episode is cut off as non-convergent.
    pub max_steps: u32,
    /// Largest LM-hip phase error accepted after lock-in (rad).
    pub phase_tolerance: f64,
    /// Lock-in window after the trigger, in gait cycles.
    pub lock_in_cycles: f64,
}

impl Default for ReflexConfig {
    fn default() -> Self {
        Self {
            threshold: 2500.0,
            lambda: 4.0,
            max_steps: 8,
            phase_tolerance: 0.1,
            lock_in_cycles: 0.25,
        }
    }
}

impl ReflexConfig {
    pub fn validate(&self) -> Result<(), ReflexError> {
        let bad = |name, reason: &str| {
            Err(ReflexError::InvalidParam {
                name,
                reason: reason.into(),
            })
        };
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return bad("threshold", "must be finite and > 0");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda", "must be finite and >= 0");
        }
        if self.max_steps == 0 {
            return bad("max_steps", "must be >= 1");
        }
        if !(self.phase_tolerance.is_finite() && self.phase_tolerance > 0.0) {
            return bad("phase_tolerance", "must be finite and > 0");
        }
        if !(self.lock_in_cycles.is_finite() && self.lock_in_cycles >= 0.0) {
            return bad("lock_in_cycles", "must be finite and >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Idle,
    Stepping,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub mode: Mode,
    pub steps_taken: u32,
    pub trigger_time: Option<f64>,
    /// +1 or -1 while stepping, 0 when idle.
    pub direction: f64,
    /// Slider amplitude per leg (m).
    pub amplitudes: [f64; 4],
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            mode: Mode::Idle,
            steps_taken: 0,
            trigger_time: None,
            direction: 0.0,
            amplitudes: [0.0; 4],
        }
    }
}

/// Sign of the filtered acceleration.
pub fn direction_of_step(filtered_accel: f64) -> Result<f64, ReflexError> {
    if filtered_accel == 0.0 || !filtered_accel.is_finite() {
        return Err(ReflexError::ZeroAcceleration);
    }
    Ok(filtered_accel.signum())
}

/// Strict threshold decision.
pub fn exceeds_threshold(filtered_accel: f64, threshold: f64) -> bool {
    filtered_accel.abs() > threshold
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseCheck {
    Skipped,
    Pass { max_error: f64 },
    Violation { leg: Leg, error: f64 },
}

/// Checks that every LM unit runs in phase with its hip; skipped while idle.
pub fn enforce_phase_consistency(mode: Mode, net: &NetworkState, mu: f64, tolerance: f64) -> PhaseCheck {
    if mode == Mode::Idle {
        return PhaseCheck::Skipped;
    }
    match lm_phase_error(net, mu) {
        Ok((_, e)) if e < tolerance => PhaseCheck::Pass { max_error: e },
        Ok((leg, error)) => PhaseCheck::Violation { leg, error },
        Err(CpgError::UndefinedPhase { .. }) => PhaseCheck::Violation {
            leg: Leg::LeftFore,
            error: PI,
        },
        Err(_) => PhaseCheck::Violation {
            leg: Leg::LeftFore,
            error: f64::NAN,
        },
    }
}

/// Lateral and longitudinal foot positions for the interference check (m).
pub fn foot_position(leg: Leg, cmd: &JointCommand, geom: &RobotGeometry) -> (f64, f64) {
    let lateral = leg.lateral_side() * geom.stance_halfwidth + geom.ratio(leg) * cmd.slider;
    let longitudinal = leg.longitudinal_side() * geom.hip_spacing / 2.0 + geom.d * cmd.hip.sin();
    (lateral, longitudinal)
}

/// Leg pairs that belong to different diagonals.
pub const CROSS_PAIRS: [(Leg, Leg); 4] = [
    (Leg::LeftFore, Leg::RightFore),
    (Leg::LeftHind, Leg::RightHind),
    (Leg::LeftFore, Leg::LeftHind),
    (Leg::RightFore, Leg::RightHind),
];

/// First pair of feet from different diagonals whose contact discs overlap.
pub fn foot_interference(cmds: &[JointCommand; 4], geom: &RobotGeometry) -> Option<(Leg, Leg)> {
    let clearance = 2.0 * geom.foot_radius;
    CROSS_PAIRS.into_iter().find(|&(a, b)| {
        let (lat_a, lon_a) = foot_position(a, &cmds[a.index()], geom);
        let (lat_b, lon_b) = foot_position(b, &cmds[b.index()], geom);
        let lateral = if a.lateral_side() != b.lateral_side() {
            // The right foot must stay to the right of the left one.
            (lat_b - lat_a) * b.lateral_side()
        } else {
            (lat_b - lat_a).abs()
        };
        lateral < clearance && (lon_b - lon_a).abs() < clearance
    })
}

/// A step-length decision: post-impact speed and the resulting foothold offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub t: f64,
    pub speed: f64,
    pub offset: f64,
    pub clamped: bool,
}

/// One trigger-to-termination stepping episode and its condition checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub trigger_time: f64,
    pub termination_time: Option<f64>,
    pub steps: u32,
    pub direction: f64,
    /// Sign of the most recent external impact, 0 if none has started.
    pub impact_direction: f64,
    pub peak_filtered: f64,
    pub safety_stop: bool,
    pub plans: Vec<PlanRecord>,
    /// Worst LM-hip phase error after the lock-in window.
    pub phase_error_after_lock: Option<f64>,
    pub interference_ticks: u32,
    /// Step onsets inside the episode, and those lifting less than required.
    pub onsets: u32,
    pub lift_violations: u32,
}

/// Pass/fail of the five stepping conditions for one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub direction: bool,
    pub phase: bool,
    pub interference: bool,
    pub lift: bool,
    pub step_length: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.direction && self.phase && self.interference && self.lift && self.step_length
    }
}

impl Episode {
    pub fn conditions(&self, phase_tolerance: f64) -> ConditionReport {
        ConditionReport {
            direction: self.direction != 0.0 && self.direction == self.impact_direction,
            // An episode cut short by a fall before the window closes has no phase to check.
            phase: match self.phase_error_after_lock {
                Some(e) => e < phase_tolerance,
                None => self.termination_time.is_none(),
            },
            interference: self.interference_ticks == 0,
            lift: self.lift_violations == 0,
            step_length: step_length_monotone(&self.plans),
        }
    }
}

/// Planned offset magnitude never decreases with speed, and strictly grows
/// between unclamped plans of strictly larger speed.
pub fn step_length_monotone(plans: &[PlanRecord]) -> bool {
    let mut sorted: Vec<&PlanRecord> = plans.iter().collect();
    sorted.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    sorted.windows(2).all(|w| {
        let (lo, hi) = (w[0], w[1]);
        let (a, b) = (lo.offset.abs(), hi.offset.abs());
        if hi.speed > lo.speed && !lo.clamped && !hi.clamped {
            b > a
        } else {
            b >= a || hi.clamped
        }
    })
}

/// Everything the closed loop needs besides the disturbance schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub oscillator: OscillatorParams,
    pub geometry: RobotGeometry,
    pub amplitude: AmplitudeConfig,
    pub reflex: ReflexConfig,
    pub plant: PlantTuning,
    pub reflex_enabled: bool,
    pub dt: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            oscillator: OscillatorParams::default(),
            geometry: RobotGeometry::default(),
            amplitude: AmplitudeConfig::default(),
            reflex: ReflexConfig::default(),
            plant: PlantTuning::default(),
            reflex_enabled: true,
            dt: 1e-3,
        }
    }
}

/// Per-tick telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    /// mm/s^2
    pub accel_raw: f64,
    /// mm/s^2
    pub accel_filtered: f64,
    pub zmp_x: f64,
    pub support_x: f64,
    /// rad
    pub roll_proxy: f64,
    pub stepping: bool,
    pub commands: [JointCommand; 4],
    pub units: [OscillatorState; cpg::NUM_UNITS],
}

/// The coupled CPG, plant, filter and reflex.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    cfg: LoopConfig,
    osc: OscillatorParams,
    coupling: CouplingMatrix,
    plant_params: PlantParams,
    disturbances: Vec<Disturbance>,
    net: NetworkState,
    plant: PlantState,
    filter: FilterState,
    ctrl: ControllerState,
    pair_clock: ZeroCrossing,
    hip_clocks: [ZeroCrossing; 4],
    knee_amplitudes: [f64; 4],
    pending_landing: Option<f64>,
    filtered: f64,
    episodes: Vec<Episode>,
    tick: u64,
}

impl ClosedLoop {
    pub fn new(cfg: LoopConfig, disturbances: Vec<Disturbance>) -> Result<Self, ReflexError> {
        cfg.oscillator.validate()?;
        cfg.geometry.validate()?;
        cfg.amplitude.validate()?;
        cfg.reflex.validate()?;
        if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
            return Err(ReflexError::InvalidParam {
                name: "dt",
                reason: "must be finite and > 0".into(),
            });
        }
        for d in &disturbances {
            d.validate()?;
        }
        let plant_params = PlantParams::new(&cfg.geometry, &cfg.plant);
        plant_params.validate()?;
        let osc = OscillatorParams {
            mu: adapt_mu(&cfg.amplitude)?,
            ..cfg.oscillator
        };
        osc.validate()?;
        let net = NetworkState::new();
        let plant = PlantState::at_rest(0.0, net.stance_pair());
        let a_k0 = cfg.amplitude.a_k0;
        Ok(Self {
            coupling: CouplingMatrix::extended_trot(cfg.reflex.lambda)?,
            plant_params,
            disturbances,
            pair_clock: ZeroCrossing::new(net.units[0].y),
            hip_clocks: Leg::ALL.map(|l| ZeroCrossing::new(net.hip(l).x)),
            knee_amplitudes: [a_k0; 4],
            filter: FilterState::new(FILTER_CUTOFF_HZ, 1.0 / cfg.dt),
            ctrl: ControllerState::default(),
            pending_landing: None,
            filtered: 0.0,
            episodes: Vec::new(),
            tick: 0,
            cfg,
            osc,
            net,
            plant,
        })
    }

    pub fn config(&self) -> &LoopConfig {
        &self.cfg
    }

    /// Oscillator parameters in use, with `mu` adapted.
    pub fn oscillator(&self) -> &OscillatorParams {
        &self.osc
    }

    pub fn network(&self) -> &NetworkState {
        &self.net
    }

    pub fn plant(&self) -> &PlantState {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerState {
        &self.ctrl
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn tick_index(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.dt
    }

    pub fn period(&self) -> f64 {
        self.osc.period()
    }

    fn q(&self) -> f64 {
        self.plant_params.q()
    }

    fn impact_direction(&self, t: f64) -> f64 {
        self.disturbances
            .iter()
            .filter(|d| d.t_start <= t)
            .max_by(|a, b| a.t_start.total_cmp(&b.t_start))
            .map_or(0.0, |d| d.force.signum())
    }

    fn slider(&self, leg: Leg) -> f64 {
        let lm = self.net.lm(leg);
        if !lm.enabled {
            return 0.0;
        }
        let max = self.cfg.geometry.max_slider;
        (self.ctrl.amplitudes[leg.index()] * lm.x / self.osc.mu.sqrt()).clamp(-max, max)
    }

    fn commands(&self) -> [JointCommand; 4] {
        let scale = self.cfg.amplitude.hip_scale();
        let a_h = self.cfg.amplitude.effective_hip_amplitude();
        Leg::ALL.map(|leg| {
            let hip = self.net.hip(leg);
            JointCommand {
                hip: hip.x * scale,
                knee: knee_signal(
                    hip.y * scale,
                    self.knee_amplitudes[leg.index()],
                    a_h,
                    self.cfg.amplitude.sign,
                ),
                slider: self.slider(leg),
            }
        })
    }

    /// Roll angular acceleration of the proxy atan(u / z_g), u = x - support.
    fn roll_accel(&self, xddot: f64) -> f64 {
        let z = self.plant_params.z_g;
        let u = self.plant.cog.x - self.plant.support_x;
        let ud = self.plant.cog.xdot;
        let n = z * z + u * u;
        (z * xddot * n - 2.0 * z * u * ud * ud) / (n * n)
    }

    /// Sets the knee amplitude of the lifting pair; returns whether the lift suffices.
    fn plan_lift(&mut self, lifting: StancePair, xddot: f64) -> bool {
        let geom = &self.cfg.geometry;
        let amp = &self.cfg.amplitude;
        let a_h = amp.effective_hip_amplitude();
        // Either swing foot may be on the falling side, so the roll is taken as adverse.
        let h_c = min_lift_height(self.roll_accel(xddot).abs(), amp.t_sw, geom.support_lever());
        let a_k = match knee_amplitude(h_c, a_h, amp, geom) {
            Ok(a) => a,
            Err(_) => PI - geom.gamma,
        };
        for leg in lifting.legs() {
            self.knee_amplitudes[leg.index()] = a_k;
        }
        lift_height(a_k, a_h, geom) >= h_c - 1e-12
    }

    fn plan(&mut self, leg: Option<Leg>, t: f64) {
        let q = self.q();
        let d = propagate_cog(self.plant.cog, self.plant.support_x, self.period() / 4.0, q);
        let plan = plan_step(d, q, &self.cfg.geometry);
        match leg {
            Some(l) => self.ctrl.amplitudes[l.index()] = plan.slider_targets[l.index()],
            None => self.ctrl.amplitudes = plan.slider_targets,
        }
        if let Some(ep) = self.episodes.last_mut() {
            ep.plans.push(PlanRecord {
                t,
                speed: d.xdot.abs(),
                offset: plan.offset,
                clamped: plan.clamped,
            });
        }
    }

    fn trigger(&mut self, t: f64) -> Result<(), ReflexError> {
        let direction = direction_of_step(self.filtered)?;
        self.net = enable_lm_units(&self.net);
        self.ctrl = ControllerState {
            mode: Mode::Stepping,
            steps_taken: 0,
            trigger_time: Some(t),
            direction,
            amplitudes: [0.0; 4],
        };
        self.episodes.push(Episode {
            trigger_time: t,
            termination_time: None,
            steps: 0,
            direction,
            impact_direction: self.impact_direction(t),
            peak_filtered: self.filtered.abs(),
            safety_stop: false,
            plans: Vec::new(),
            phase_error_after_lock: None,
            interference_ticks: 0,
            onsets: 0,
            lift_violations: 0,
        });
        // The LM joints sit at zero, so the first plan applies at once and steps toward the impact.
        let speed = self.plant.cog.xdot.abs();
        let d = PendulumState::new(self.plant.cog.x, direction * speed);
        let plan = plan_step(d, self.q(), &self.cfg.geometry);
        self.ctrl.amplitudes = plan.slider_targets;
        if let Some(ep) = self.episodes.last_mut() {
            ep.plans.push(PlanRecord {
                t,
                speed,
                offset: plan.offset,
                clamped: plan.clamped,
            });
        }
        Ok(())
    }

    fn terminate(&mut self, t: f64, safety_stop: bool) {
        self.net = disable_lm_units(&self.net);
        if let Some(ep) = self.episodes.last_mut() {
            ep.termination_time = Some(t);
            ep.steps = self.ctrl.steps_taken;
            ep.safety_stop = safety_stop;
        }
        self.ctrl = ControllerState::default();
    }

    /// Advances the loop by one tick.
    pub fn step(&mut self) -> Result<TickRecord, ReflexError> {
        let dt = self.cfg.dt;
        let t0 = self.time();
        let stepping = self.ctrl.mode == Mode::Stepping;
        let input = PlantInput {
            force: force_at(&self.disturbances, t0),
            phase: self.net.stance_pair(),
            landing_offset: self.pending_landing.take(),
            step_reach: if stepping {
                self.cfg.geometry.max_foot_reach()
            } else {
                0.0
            },
        };
        let prev = self.plant;
        self.plant = step_plant(&prev, &self.plant_params, &input, dt)?;
        let raw = measured_lateral_accel(&prev, &self.plant, dt);
        let (filter, filtered) = self.filter.step(raw);
        self.filter = filter;
        self.filtered = filtered;
        self.net = step_network(&self.net, &self.osc, &self.coupling, dt)?;
        self.tick += 1;
        let t = self.time();
        let xddot = raw / 1000.0;

        if self.pair_clock.update(self.net.units[0].y) {
            let landing = self.net.stance_pair();
            let offsets: f64 = landing
                .legs()
                .iter()
                .map(|&l| self.cfg.geometry.ratio(l) * self.slider(l))
                .sum();
            self.pending_landing = Some(offsets / 2.0);
            let lift_ok = self.plan_lift(landing.other(), xddot);
            if self.ctrl.mode == Mode::Stepping {
                self.ctrl.steps_taken += 1;
                if let Some(ep) = self.episodes.last_mut() {
                    ep.onsets += 1;
                    ep.lift_violations += u32::from(!lift_ok);
                    ep.steps = self.ctrl.steps_taken;
                }
                if !exceeds_threshold(filtered, self.cfg.reflex.threshold) {
                    self.terminate(t, false);
                } else if self.ctrl.steps_taken >= self.cfg.reflex.max_steps {
                    self.terminate(t, true);
                }
            }
        }

        if self.ctrl.mode == Mode::Idle
            && self.cfg.reflex_enabled
            && exceeds_threshold(filtered, self.cfg.reflex.threshold)
        {
            self.trigger(t)?;
        }

        let crossings: Vec<Leg> = Leg::ALL
            .into_iter()
            .filter(|&l| self.hip_clocks[l.index()].update(self.net.hip(l).x))
            .collect();
        if self.ctrl.mode == Mode::Stepping {
            for leg in crossings {
                self.plan(Some(leg), t);
            }
            let lock_at = self.ctrl.trigger_time.unwrap_or(t) + self.cfg.reflex.lock_in_cycles * self.period();
            let phase_error = if t >= lock_at - 1e-9 {
                match enforce_phase_consistency(Mode::Stepping, &self.net, self.osc.mu, self.cfg.reflex.phase_tolerance) {
                    PhaseCheck::Pass { max_error } => Some(max_error),
                    PhaseCheck::Violation { error, .. } => Some(error),
                    PhaseCheck::Skipped => None,
                }
            } else {
                None
            };
            let interfering = foot_interference(&self.commands(), &self.cfg.geometry).is_some();
            if let Some(ep) = self.episodes.last_mut() {
                ep.peak_filtered = ep.peak_filtered.max(filtered.abs());
                if let Some(e) = phase_error {
                    let worst = ep.phase_error_after_lock.map_or(e, |w: f64| w.max(e));
                    ep.phase_error_after_lock = Some(if e.is_nan() { f64::NAN } else { worst });
                }
                ep.interference_ticks += u32::from(interfering);
            }
        }

        let body = [BodySegment {
            m: self.plant_params.mass,
            x: self.plant.cog.x,
            z: self.plant_params.z_g,
            ax: xddot,
            az: 0.0,
        }];
        let zmp_x = compute_zmp_x(&body, self.plant_params.g, self.cfg.plant.zmp_form)?;
        Ok(TickRecord {
            t,
            x: self.plant.cog.x,
            xdot: self.plant.cog.xdot,
            accel_raw: raw,
            accel_filtered: filtered,
            zmp_x,
            support_x: self.plant.support_x,
            roll_proxy: self.plant.roll_proxy,
            stepping: self.ctrl.mode == Mode::Stepping,
            commands: self.commands(),
            units: self.net.units,
        })
    }

    pub fn fallen(&self) -> bool {
        self.plant.fallen
    }
}
