use lateral_trot::plot::{emit_column_plots, emit_trace_plots, TraceColumns};
use lateral_trot::scenario::{run_scenario, run_sweep, trace_columns, ScenarioConfig, SimTrace, SweepSpec};

#[test]
fn config_round_trips_through_toml() {
    let cfg = ScenarioConfig::impact(180.0, false);
    let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    assert!(ScenarioConfig::from_toml("durationx = 1.0").unwrap_err().is_config());
    assert!(ScenarioConfig::from_toml("dt_s = -1.0").unwrap_err().is_config());
    assert!(ScenarioConfig::from_toml("[oscillator]\nbeta = 1.5").unwrap_err().is_config());
}

#[test]
fn shipped_configs_load() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for name in ["impact_220n.toml", "quiet_trot.toml"] {
        ScenarioConfig::load(&std::path::Path::new(dir).join(name)).unwrap();
    }
}

#[test]
fn runs_are_bit_identical() {
    let cfg = ScenarioConfig { duration_s: 3.5, ..ScenarioConfig::impact(220.0, true) };
    let csv = || {
        let (trace, _) = run_scenario(&cfg).unwrap();
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(csv(), csv());
}

#[test]
fn trace_csv_has_one_column_per_header() {
    let cfg = ScenarioConfig { duration_s: 0.05, ..ScenarioConfig::default() };
    let (trace, _) = run_scenario(&cfg).unwrap();
    assert_eq!(trace.records.len(), 50);
    let mut out = Vec::new();
    trace.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), trace_columns().join(","));
    assert!(lines.all(|l| l.split(',').count() == trace_columns().len()));
}

#[test]
fn no_reflex_220n_falls() {
    let (_, summary) = run_scenario(&ScenarioConfig::impact(220.0, false)).unwrap();
    assert!(summary.fallen);
    assert!(summary.episodes.is_empty());
}

#[test]
fn single_magnitude_sweep_matches_run() {
    let base = ScenarioConfig { duration_s: 4.0, ..ScenarioConfig::default() };
    let spec = SweepSpec { with_and_without_reflex: false, ..SweepSpec::new(vec![200.0]) };
    let table = run_sweep(&spec, &base, false).unwrap();
    let cfg = ScenarioConfig { duration_s: 4.0, ..ScenarioConfig::impact(200.0, true) };
    let (_, summary) = run_scenario(&cfg).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].result.as_ref().unwrap(), &summary);
}

#[test]
fn sweep_spec_rejects_unsorted_magnitudes() {
    let spec = SweepSpec::new(vec![200.0, 100.0]);
    assert!(run_sweep(&spec, &ScenarioConfig::default(), false).unwrap_err().is_config());
}

#[test]
fn plots_are_written_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig { duration_s: 0.5, ..ScenarioConfig::default() };
    let (trace, _) = run_scenario(&cfg).unwrap();
    let paths = emit_trace_plots(&trace, dir.path(), 2500.0).unwrap();
    assert_eq!(paths.len(), 3);
    assert!(paths.iter().all(|p| p.exists()));
    let csv = dir.path().join("trace.csv");
    trace.save_csv(&csv).unwrap();
    let cols = TraceColumns::read_csv(&csv).unwrap();
    assert_eq!(cols, TraceColumns::from_trace(&trace));
}

#[test]
fn empty_trace_cannot_be_plotted() {
    let dir = tempfile::tempdir().unwrap();
    let cols = TraceColumns::from_trace(&SimTrace::default());
    assert!(emit_column_plots(&cols, dir.path(), 2500.0).is_err());
}
