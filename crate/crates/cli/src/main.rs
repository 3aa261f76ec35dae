use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lateral_trot::plot::{emit_column_plots, emit_sweep_plots, TraceColumns};
use lateral_trot::scenario::{run_scenario, run_sweep, write_outputs, ScenarioConfig, ScenarioError, SweepSpec};

/// Lateral push-recovery simulator for a trotting quadruped.
#[derive(Debug, Parser)]
#[command(name = "lateral-trot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    /// Integration step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time (s).
    #[arg(long)]
    duration: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(dt) = self.dt {
            cfg.dt_s = dt;
        }
        if let Some(d) = self.duration {
            cfg.duration_s = d;
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its trace, summary and plots.
    Run {
        config: PathBuf,
        /// Write trace.csv, summary.json and plots here instead of the paths in the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep impact magnitudes and report the largest recoverable one.
    Sweep {
        config: PathBuf,
        /// Comma-separated, strictly increasing impact magnitudes (N).
        #[arg(long, value_delimiter = ',', required = true)]
        magnitudes: Vec<f64>,
        /// Run every magnitude with and without the reflex.
        #[arg(long)]
        with_and_without_reflex: bool,
        /// Impact start time (s).
        #[arg(long, default_value_t = 2.5)]
        t_start: f64,
        /// Impact duration (s).
        #[arg(long, default_value_t = 0.2)]
        impact_duration: f64,
        /// Directory for sweep.csv, per-row traces and overlay plots.
        #[arg(long, default_value = "sweep_out")]
        out_dir: PathBuf,
        /// Also write the full trace of every row.
        #[arg(long)]
        traces: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Plot a telemetry CSV written by `run`.
    Plot {
        trace: PathBuf,
        /// Output directory; defaults to the CSV's directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Threshold line on the acceleration chart (mm/s^2).
        #[arg(long, default_value_t = 2500.0)]
        threshold: f64,
    },
}

fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::load(path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run(config: &Path, out_dir: Option<&Path>, overrides: &Overrides) -> Result<(), ScenarioError> {
    let mut cfg = load(config, overrides)?;
    if let Some(dir) = out_dir {
        create_dir(dir)?;
        cfg.output.trace_csv = Some(dir.join("trace.csv"));
        cfg.output.summary_json = Some(dir.join("summary.json"));
        cfg.output.plot_dir = Some(dir.to_path_buf());
    }
    let (trace, summary) = run_scenario(&cfg)?;
    write_outputs(&cfg, &trace, &summary)?;
    println!("fallen: {}", summary.fallen);
    println!("episodes: {}", summary.episodes.len());
    for (i, e) in summary.episodes.iter().enumerate() {
        let end = e
            .termination_time
            .map_or_else(|| "open".to_string(), |t| format!("{t:.3} s"));
        println!(
            "  episode {}: trigger {:.3} s, end {end}, steps {}, direction {:+}",
            i + 1,
            e.trigger_time,
            e.steps,
            e.direction
        );
    }
    println!("peak filtered accel: {:.1} mm/s^2", summary.peak_filtered_mm_s2);
    println!(
        "roll proxy range: {:.2} .. {:.2} deg",
        summary.roll_proxy_min_deg, summary.roll_proxy_max_deg
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    config: &Path,
    magnitudes: Vec<f64>,
    both: bool,
    t_start: f64,
    impact_duration: f64,
    out_dir: &Path,
    traces: bool,
    overrides: &Overrides,
) -> Result<(), ScenarioError> {
    let base = load(config, overrides)?;
    let spec = SweepSpec {
        magnitudes,
        t_start_s: t_start,
        duration_s: impact_duration,
        with_and_without_reflex: both,
    };
    let table = run_sweep(&spec, &base, traces)?;
    create_dir(out_dir)?;
    let csv_path = out_dir.join("sweep.csv");
    fs::write(&csv_path, table.to_csv()).map_err(|source| ScenarioError::Io {
        path: csv_path.clone(),
        source,
    })?;
    if traces {
        for row in &table.rows {
            if let Some(trace) = &row.trace {
                let tag = if row.reflex_enabled { "reflex" } else { "no_reflex" };
                trace.save_csv(&out_dir.join(format!("trace_{tag}_{}N.csv", row.magnitude)))?;
            }
        }
    }
    emit_sweep_plots(&table, out_dir)?;
    print!("{}", table.to_csv());
    let groups: Vec<bool> = if both { vec![false, true] } else { vec![base.reflex_enabled] };
    for g in groups {
        let label = if g { "with reflex" } else { "without reflex" };
        match table.max_recoverable(g) {
            Some(m) => println!("max recoverable {label}: {m} N"),
            None => println!("max recoverable {label}: none"),
        }
    }
    Ok(())
}

fn plot(trace: &Path, out_dir: Option<&Path>, threshold: f64) -> Result<(), ScenarioError> {
    let cols = TraceColumns::read_csv(trace)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| trace.parent().map(Path::to_path_buf).unwrap_or_default());
    for p in emit_column_plots(&cols, &dir, threshold)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn exit_code(e: &ScenarioError) -> u8 {
    match e {
        ScenarioError::Simulation { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out_dir,
            overrides,
        } => run(&config, out_dir.as_deref(), &overrides),
        Command::Sweep {
            config,
            magnitudes,
            with_and_without_reflex,
            t_start,
            impact_duration,
            out_dir,
            traces,
            overrides,
        } => sweep(
            &config,
            magnitudes,
            with_and_without_reflex,
            t_start,
            impact_duration,
            &out_dir,
            traces,
            &overrides,
        ),
        Command::Plot {
            trace,
            out_dir,
            threshold,
        } => plot(&trace, out_dir.as_deref(), threshold),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

