//! Scenario configuration, single runs, impact sweeps and telemetry files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpg::{Leg, OscillatorParams, NUM_UNITS};
use crate::gait::{AmplitudeConfig, RobotGeometry};
use crate::plant::{Disturbance, PlantTuning};
use crate::reflex::{ClosedLoop, ConditionReport, Episode, LoopConfig, ReflexConfig, ReflexError, TickRecord};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation aborted at tick {tick}: {source}")]
    Simulation { tick: u64, source: ReflexError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("plot {path}: {reason}")]
    Plot { path: PathBuf, reason: String },
}

impl ScenarioError {
    pub fn is_config(&self) -> bool {
        matches!(self, ScenarioError::Config(_))
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub force_n: f64,
    pub t_start_s: f64,
    pub duration_s: f64,
}

impl From<DisturbanceConfig> for Disturbance {
    fn from(d: DisturbanceConfig) -> Self {
        Disturbance {
            force: d.force_n,
            t_start: d.t_start_s,
            duration: d.duration_s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub trace_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
}

/// A complete, TOML-serializable simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub dt_s: f64,
    pub reflex_enabled: bool,
    pub oscillator: OscillatorParams,
    pub geometry: RobotGeometry,
    pub amplitude: AmplitudeConfig,
    pub reflex: ReflexConfig,
    pub plant: PlantTuning,
    pub disturbances: Vec<DisturbanceConfig>,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 6.0,
            dt_s: 1e-3,
            reflex_enabled: true,
            oscillator: OscillatorParams::default(),
            geometry: RobotGeometry::default(),
            amplitude: AmplitudeConfig::default(),
            reflex: ReflexConfig::default(),
            plant: PlantTuning::default(),
            disturbances: Vec::new(),
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// The lateral impact test: `force` N at 2.5 s for 0.2 s.
    pub fn impact(force: f64, reflex_enabled: bool) -> Self {
        Self {
            reflex_enabled,
            disturbances: vec![DisturbanceConfig {
                force_n: force,
                t_start_s: 2.5,
                duration_s: 0.2,
            }],
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            ScenarioError::Config(m) => ScenarioError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |m: String| Err(ScenarioError::Config(m));
        if !(self.dt_s.is_finite() && self.dt_s > 0.0) {
            return err(format!("dt_s must be > 0, got {}", self.dt_s));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return err(format!("duration_s must be > 0, got {}", self.duration_s));
        }
        for (i, d) in self.disturbances.iter().enumerate() {
            let dist = Disturbance::from(*d);
            if let Err(e) = dist.validate() {
                return err(format!("disturbances[{i}]: {e}"));
            }
            if dist.end() > self.duration_s + 1e-12 {
                return err(format!(
                    "disturbances[{i}] ends at {} s, after duration_s = {} s",
                    dist.end(),
                    self.duration_s
                ));
            }
        }
        ClosedLoop::new(self.loop_config(), self.disturbance_list())
            .map(|_| ())
            .map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            oscillator: self.oscillator,
            geometry: self.geometry,
            amplitude: self.amplitude,
            reflex: self.reflex,
            plant: self.plant,
            reflex_enabled: self.reflex_enabled,
            dt: self.dt_s,
        }
    }

    pub fn disturbance_list(&self) -> Vec<Disturbance> {
        self.disturbances.iter().map(|&d| d.into()).collect()
    }

    pub fn ticks(&self) -> u64 {
        (self.duration_s / self.dt_s).round() as u64
    }
}

/// Full per-tick telemetry of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrace {
    pub records: Vec<TickRecord>,
}

/// Column names of the telemetry CSV, each with a unit suffix.
pub fn trace_columns() -> Vec<String> {
    let mut cols: Vec<String> = [
        "t_s",
        "x_g_m",
        "xdot_g_m_s",
        "accel_raw_mm_s2",
        "accel_filt_mm_s2",
        "zmp_x_m",
        "support_x_m",
        "roll_proxy_deg",
        "reflex_stepping_flag",
    ]
    .map(String::from)
    .to_vec();
    for leg in Leg::ALL {
        let n = leg.short_name();
        cols.push(format!("hip_{n}_rad"));
        cols.push(format!("knee_{n}_rad"));
        cols.push(format!("slider_{n}_m"));
    }
    for i in 1..=NUM_UNITS {
        cols.push(format!("osc{i}_x_rad"));
        cols.push(format!("osc{i}_y_rad"));
        cols.push(format!("osc{i}_enabled_flag"));
    }
    cols
}

fn record_fields(r: &TickRecord) -> Vec<String> {
    let flag = |b: bool| if b { "1".to_string() } else { "0".to_string() };
    let mut f = vec![
        r.t.to_string(),
        r.x.to_string(),
        r.xdot.to_string(),
        r.accel_raw.to_string(),
        r.accel_filtered.to_string(),
        r.zmp_x.to_string(),
        r.support_x.to_string(),
        r.roll_proxy.to_degrees().to_string(),
        flag(r.stepping),
    ];
    for c in &r.commands {
        f.push(c.hip.to_string());
        f.push(c.knee.to_string());
        f.push(c.slider.to_string());
    }
    for u in &r.units {
        f.push(u.x.to_string());
        f.push(u.y.to_string());
        f.push(flag(u.enabled));
    }
    f
}

impl SimTrace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(trace_columns())?;
        for r in &self.records {
            out.write_record(record_fields(r))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), ScenarioError> {
        let file = fs::File::create(path).map_err(|e| ScenarioError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|source| ScenarioError::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub reflex_enabled: bool,
    pub impact_n: f64,
    pub fallen: bool,
    pub fall_time_s: Option<f64>,
    pub episodes: Vec<Episode>,
    pub conditions: Vec<ConditionReport>,
    /// Last termination minus first trigger (s).
    pub recovery_time_s: Option<f64>,
    pub recovery_cycles: Option<f64>,
    pub roll_proxy_min_deg: f64,
    pub roll_proxy_max_deg: f64,
    pub peak_filtered_mm_s2: f64,
    pub gait_period_s: f64,
}

impl RunSummary {
    pub fn max_abs_roll_deg(&self) -> f64 {
        self.roll_proxy_min_deg.abs().max(self.roll_proxy_max_deg.abs())
    }

    /// Recovered: upright at the end with every episode terminated normally.
    pub fn recovered(&self) -> bool {
        !self.fallen && self.episodes.iter().all(|e| e.termination_time.is_some() && !e.safety_stop)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

fn summarize(cfg: &ScenarioConfig, cl: &ClosedLoop, trace: &SimTrace) -> RunSummary {
    let episodes = cl.episodes().to_vec();
    let tol = cfg.reflex.phase_tolerance;
    let period = cl.period();
    let recovery_time_s = match (episodes.first(), episodes.last()) {
        (Some(f), Some(l)) => l.termination_time.map(|end| end - f.trigger_time),
        _ => None,
    };
    let roll = trace.records.iter().map(|r| r.roll_proxy.to_degrees());
    RunSummary {
        reflex_enabled: cfg.reflex_enabled,
        impact_n: cfg.disturbances.iter().map(|d| d.force_n).fold(0.0, |a, f| if f.abs() > a.abs() { f } else { a }),
        fallen: cl.fallen(),
        fall_time_s: cl.fallen().then(|| cl.time()),
        conditions: episodes.iter().map(|e| e.conditions(tol)).collect(),
        recovery_time_s,
        recovery_cycles: recovery_time_s.map(|t| t / period),
        roll_proxy_min_deg: roll.clone().fold(0.0, f64::min),
        roll_proxy_max_deg: roll.fold(0.0, f64::max),
        peak_filtered_mm_s2: trace.records.iter().map(|r| r.accel_filtered.abs()).fold(0.0, f64::max),
        gait_period_s: period,
        episodes,
    }
}

/// Runs one scenario to its duration or until the plant falls.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(SimTrace, RunSummary), ScenarioError> {
    cfg.validate()?;
    let mut cl = ClosedLoop::new(cfg.loop_config(), cfg.disturbance_list())
        .map_err(|e| ScenarioError::Config(e.to_string()))?;
    let mut trace = SimTrace {
        records: Vec::with_capacity(cfg.ticks() as usize),
    };
    for _ in 0..cfg.ticks() {
        let rec = cl.step().map_err(|source| ScenarioError::Simulation {
            tick: cl.tick_index(),
            source,
        })?;
        trace.records.push(rec);
        if cl.fallen() {
            break;
        }
    }
    let summary = summarize(cfg, &cl, &trace);
    Ok((trace, summary))
}

/// Writes the trace and summary files named in `cfg.output`.
pub fn write_outputs(cfg: &ScenarioConfig, trace: &SimTrace, summary: &RunSummary) -> Result<(), ScenarioError> {
    if let Some(p) = &cfg.output.trace_csv {
        trace.save_csv(p)?;
    }
    if let Some(p) = &cfg.output.summary_json {
        fs::write(p, summary.to_json()).map_err(|e| ScenarioError::io(p, e))?;
    }
    if let Some(dir) = &cfg.output.plot_dir {
        crate::plot::emit_trace_plots(trace, dir, cfg.reflex.threshold)?;
    }
    Ok(())
}

/// Impact magnitudes to sweep, applied at a fixed start time and duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub magnitudes: Vec<f64>,
    pub t_start_s: f64,
    pub duration_s: f64,
    /// Run every magnitude both with and without the reflex.
    pub with_and_without_reflex: bool,
}

impl SweepSpec {
    pub fn new(magnitudes: Vec<f64>) -> Self {
        Self {
            magnitudes,
            t_start_s: 2.5,
            duration_s: 0.2,
            with_and_without_reflex: true,
        }
    }

    /// `count` evenly spaced magnitudes from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Self {
        let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
        Self::new((0..count).map(|i| lo + step * i as f64).collect())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.magnitudes.is_empty() {
            return Err(ScenarioError::Config("sweep needs at least one magnitude".into()));
        }
        if self.magnitudes.iter().any(|m| !m.is_finite()) {
            return Err(ScenarioError::Config("sweep magnitudes must be finite".into()));
        }
        if self.magnitudes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ScenarioError::Config("sweep magnitudes must be strictly increasing".into()));
        }
        Ok(())
    }

    fn scenario(&self, base: &ScenarioConfig, magnitude: f64, reflex: bool) -> ScenarioConfig {
        ScenarioConfig {
            reflex_enabled: reflex,
            disturbances: vec![DisturbanceConfig {
                force_n: magnitude,
                t_start_s: self.t_start_s,
                duration_s: self.duration_s,
            }],
            output: OutputConfig::default(),
            ..base.clone()
        }
    }
}

/// One magnitude of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub magnitude: f64,
    pub reflex_enabled: bool,
    pub result: Result<RunSummary, String>,
    /// (t, roll proxy in degrees) for overlay plots.
    pub roll_trace: Vec<(f64, f64)>,
    pub trace: Option<SimTrace>,
}

impl SweepRow {
    pub fn recovered(&self) -> bool {
        self.result.as_ref().is_ok_and(|s| s.recovered())
    }
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn group(&self, reflex: bool) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.reflex_enabled == reflex)
    }

    /// Top of the contiguous run of recovered magnitudes starting at the smallest.
    pub fn max_recoverable(&self, reflex: bool) -> Option<f64> {
        self.group(reflex).take_while(|r| r.recovered()).map(|r| r.magnitude).last()
    }

    /// Max |roll proxy| is nondecreasing in magnitude over the recovered rows.
    pub fn roll_monotone(&self, reflex: bool) -> bool {
        let rolls: Vec<f64> = self
            .group(reflex)
            .filter(|r| r.recovered())
            .filter_map(|r| r.result.as_ref().ok().map(|s| s.max_abs_roll_deg()))
            .collect();
        rolls.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "impact_n,reflex_flag,recovered_flag,fallen_flag,episodes_count,recovery_cycles,max_abs_roll_deg,peak_filtered_mm_s2,error\n",
        );
        for r in &self.rows {
            let flag = |b: bool| u8::from(b);
            match &r.result {
                Ok(sum) => {
                    let cycles = sum.recovery_cycles.map(|c| c.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},",
                        r.magnitude,
                        flag(r.reflex_enabled),
                        flag(sum.recovered()),
                        flag(sum.fallen),
                        sum.episodes.len(),
                        cycles,
                        sum.max_abs_roll_deg(),
                        sum.peak_filtered_mm_s2
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        s,
                        "{},{},0,,,,,,\"{}\"",
                        r.magnitude,
                        flag(r.reflex_enabled),
                        e.replace('"', "'")
                    );
                }
            }
        }
        s
    }
}

/// Runs every magnitude (in parallel); rows are ordered by reflex group, then magnitude.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig, keep_traces: bool) -> Result<SweepTable, ScenarioError> {
    spec.validate()?;
    base.validate()?;
    let groups: Vec<bool> = if spec.with_and_without_reflex {
        vec![false, true]
    } else {
        vec![base.reflex_enabled]
    };
    let jobs: Vec<(bool, f64)> = groups
        .iter()
        .flat_map(|&g| spec.magnitudes.iter().map(move |&m| (g, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(reflex, magnitude)| {
            let cfg = spec.scenario(base, magnitude, reflex);
            match run_scenario(&cfg) {
                Ok((trace, summary)) => SweepRow {
                    magnitude,
                    reflex_enabled: reflex,
                    roll_trace: trace.records.iter().map(|r| (r.t, r.roll_proxy.to_degrees())).collect(),
                    result: Ok(summary),
                    trace: keep_traces.then_some(trace),
                },
                Err(e) => SweepRow {
                    magnitude,
                    reflex_enabled: reflex,
                    result: Err(e.to_string()),
                    roll_trace: Vec::new(),
                    trace: None,
                },
            }
        })
        .collect();
    Ok(SweepTable { rows })
}
