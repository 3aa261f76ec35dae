//! SVG line charts of traces and sweeps.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::scenario::{ScenarioError, SimTrace, SweepTable};

/// The columns the charts need, from a run or a telemetry CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceColumns {
    pub t: Vec<f64>,
    pub accel_raw: Vec<f64>,
    pub accel_filtered: Vec<f64>,
    pub x: Vec<f64>,
    pub zmp_x: Vec<f64>,
    pub support_x: Vec<f64>,
    pub roll_deg: Vec<f64>,
}

impl TraceColumns {
    pub fn from_trace(trace: &SimTrace) -> Self {
        let col = |f: fn(&crate::reflex::TickRecord) -> f64| trace.records.iter().map(f).collect();
        Self {
            t: col(|r| r.t),
            accel_raw: col(|r| r.accel_raw),
            accel_filtered: col(|r| r.accel_filtered),
            x: col(|r| r.x),
            zmp_x: col(|r| r.zmp_x),
            support_x: col(|r| r.support_x),
            roll_deg: col(|r| r.roll_proxy.to_degrees()),
        }
    }

    pub fn read_csv(path: &Path) -> Result<Self, ScenarioError> {
        let csv_err = |source| ScenarioError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
        let names = [
            "t_s",
            "accel_raw_mm_s2",
            "accel_filt_mm_s2",
            "x_g_m",
            "zmp_x_m",
            "support_x_m",
            "roll_proxy_deg",
        ];
        let mut idx = [0usize; 7];
        for (slot, name) in idx.iter_mut().zip(names) {
            *slot = *index.get(name).ok_or_else(|| ScenarioError::Plot {
                path: path.to_path_buf(),
                reason: format!("missing column `{name}`"),
            })?;
        }
        let mut cols: [Vec<f64>; 7] = Default::default();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            for (c, &i) in cols.iter_mut().zip(&idx) {
                let v = rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| ScenarioError::Plot {
                    path: path.to_path_buf(),
                    reason: format!("bad number in data row {} column {}", line + 1, headers.get(i).unwrap_or("?")),
                })?;
                c.push(v);
            }
        }
        let [t, accel_raw, accel_filtered, x, zmp_x, support_x, roll_deg] = cols;
        Ok(Self {
            t,
            accel_raw,
            accel_filtered,
            x,
            zmp_x,
            support_x,
            roll_deg,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

struct Series<'a> {
    label: String,
    points: Vec<(f64, f64)>,
    color: &'a RGBColor,
}

fn plot_err(path: &Path, e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Plot {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let pad = ((y1 - y0) * 0.05).max(1e-9);
    ((x0, x1), (y0 - pad, y1 + pad))
}

fn line_chart(path: &Path, title: &str, y_label: &str, series: &[Series]) -> Result<(), ScenarioError> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(plot_err(path, "nothing to plot"));
    }
    let ((x0, x1), (y0, y1)) = bounds(series);
    let root = SVGBackend::new(path, (900, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(path, e))?;
    chart
        .configure_mesh()
        .x_desc("t (s)")
        .y_desc(y_label)
        .draw()
        .map_err(|e| plot_err(path, e))?;
    for s in series {
        let color = *s.color;
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
            .map_err(|e| plot_err(path, e))?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(path, e))?;
    root.present().map_err(|e| plot_err(path, e))?;
    Ok(())
}

fn zip(t: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    t.iter().copied().zip(v.iter().copied()).collect()
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

/// Writes `accel.svg`, `cog_zmp.svg` and `roll.svg` into `dir`.
pub fn emit_column_plots(cols: &TraceColumns, dir: &Path, threshold: f64) -> Result<Vec<PathBuf>, ScenarioError> {
    if cols.is_empty() {
        return Err(plot_err(dir, "empty trace"));
    }
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let t = &cols.t;
    let level = |v: f64| vec![(t[0], v), (t[t.len() - 1], v)];
    let accel = dir.join("accel.svg");
    line_chart(
        &accel,
        "Lateral acceleration",
        "mm/s^2",
        &[
            Series { label: "raw".into(), points: zip(t, &cols.accel_raw), color: &PALETTE[5] },
            Series { label: "filtered".into(), points: zip(t, &cols.accel_filtered), color: &PALETTE[0] },
            Series { label: "+threshold".into(), points: level(threshold), color: &PALETTE[1] },
            Series { label: "-threshold".into(), points: level(-threshold), color: &PALETTE[1] },
        ],
    )?;
    let cog = dir.join("cog_zmp.svg");
    line_chart(
        &cog,
        "CoG and ZMP",
        "x (m)",
        &[
            Series { label: "CoG".into(), points: zip(t, &cols.x), color: &PALETTE[0] },
            Series { label: "ZMP".into(), points: zip(t, &cols.zmp_x), color: &PALETTE[3] },
            Series { label: "support".into(), points: zip(t, &cols.support_x), color: &PALETTE[2] },
        ],
    )?;
    let roll = dir.join("roll.svg");
    line_chart(
        &roll,
        "Roll proxy",
        "deg",
        &[Series { label: "roll".into(), points: zip(t, &cols.roll_deg), color: &PALETTE[4] }],
    )?;
    Ok(vec![accel, cog, roll])
}

pub fn emit_trace_plots(trace: &SimTrace, dir: &Path, threshold: f64) -> Result<Vec<PathBuf>, ScenarioError> {
    emit_column_plots(&TraceColumns::from_trace(trace), dir, threshold)
}

/// One roll overlay per group: `sweep_roll_reflex.svg` and `sweep_roll_no_reflex.svg`.
pub fn emit_sweep_plots(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let mut out = Vec::new();
    for (reflex, name, title) in [
        (true, "sweep_roll_reflex.svg", "Roll proxy under lateral impacts, reflex on"),
        (false, "sweep_roll_no_reflex.svg", "Roll proxy under lateral impacts, reflex off"),
    ] {
        let series: Vec<Series> = table
            .group(reflex)
            .enumerate()
            .map(|(i, r)| Series {
                label: format!("{} N", r.magnitude),
                points: r.roll_trace.clone(),
                color: &PALETTE[i % PALETTE.len()],
            })
            .collect();
        if series.is_empty() {
            continue;
        }
        let path = dir.join(name);
        line_chart(&path, title, "roll proxy (deg)", &series)?;
        out.push(path);
    }
    if out.is_empty() {
        return Err(plot_err(dir, "empty sweep table"));
    }
    Ok(out)
}
