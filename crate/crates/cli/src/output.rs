//! Result files: raw rows as CSV, per-cell means as JSON, SVG plots.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Serialize;
use vi_bench::{epsilon_exponent, log_accuracy_fit, Dims, ExperimentConfig, ResultRow};

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 12] = [
    "experiment",
    "dim_a",
    "dim_b",
    "dim_c",
    "eps",
    "trial",
    "seed",
    "iterations",
    "oracle_calls",
    "final_gap",
    "converged",
    "wall_time_s",
];

/// 17 significant digits, enough to read back the same `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.id().to_string(),
            r.dims.a.to_string(),
            r.dims.b.to_string(),
            r.dims.c.to_string(),
            fmt_float(r.eps),
            r.trial.to_string(),
            r.seed.to_string(),
            r.iterations.to_string(),
            r.oracle_calls.to_string(),
            fmt_float(r.final_gap),
            r.converged.to_string(),
            fmt_float(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(CliError::Format(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |field: &str| CliError::Format(format!("row {}: cannot parse {field}", i + 1));
        let int = |j: usize| rec[j].parse::<usize>().map_err(|_| bad(CSV_HEADER[j]));
        let float = |j: usize| rec[j].parse::<f64>().map_err(|_| bad(CSV_HEADER[j]));
        rows.push(ResultRow {
            experiment: rec[0].parse().map_err(|_| bad("experiment"))?,
            dims: Dims {
                a: int(1)?,
                b: int(2)?,
                c: int(3)?,
            },
            eps: float(4)?,
            trial: int(5)?,
            seed: rec[6].parse().map_err(|_| bad("seed"))?,
            iterations: int(7)?,
            oracle_calls: int(8)?,
            final_gap: float(9)?,
            converged: rec[10].parse().map_err(|_| bad("converged"))?,
            wall_time_s: float(11)?,
        });
    }
    Ok(rows)
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Means over the trials of one `(dims, eps)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_c: usize,
    pub eps: f64,
    pub trials: usize,
    pub converged: usize,
    pub mean_iterations: f64,
    pub mean_oracle_calls: f64,
    /// Over the trials with a finite certificate.
    pub mean_final_gap: Option<f64>,
    pub mean_wall_time_s: f64,
}

/// Fits of the mean iteration counts of one dimension across accuracies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_c: usize,
    /// `s` in `iterations ∝ ε^{−s}`.
    pub epsilon_exponent: Option<f64>,
    /// R² of `iterations ≈ c·ln(1/ε) + d`.
    pub log_fit_r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub search_factor: f64,
    pub cells: Vec<CellSummary>,
    pub fits: Vec<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiments: Vec<ExperimentSummary>,
}

pub fn summarize(cfg: &ExperimentConfig, rows: &[ResultRow]) -> ExperimentSummary {
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    for dims in &cfg.dims {
        let mut eps_axis = Vec::new();
        let mut iters = Vec::new();
        for &eps in &cfg.eps {
            let cell: Vec<&ResultRow> = rows.iter().filter(|r| r.dims == *dims && r.eps == eps).collect();
            if cell.is_empty() {
                continue;
            }
            let mean_iterations = mean(cell.iter().map(|r| r.iterations as f64)).unwrap_or(0.0);
            eps_axis.push(eps);
            iters.push(mean_iterations);
            cells.push(CellSummary {
                dim_a: dims.a,
                dim_b: dims.b,
                dim_c: dims.c,
                eps,
                trials: cell.len(),
                converged: cell.iter().filter(|r| r.converged).count(),
                mean_iterations,
                mean_oracle_calls: mean(cell.iter().map(|r| r.oracle_calls as f64)).unwrap_or(0.0),
                mean_final_gap: mean(cell.iter().map(|r| r.final_gap).filter(|g| g.is_finite())),
                mean_wall_time_s: mean(cell.iter().map(|r| r.wall_time_s)).unwrap_or(0.0),
            });
        }
        let positive = iters.iter().all(|k| *k > 0.0);
        fits.push(FitSummary {
            dim_a: dims.a,
            dim_b: dims.b,
            dim_c: dims.c,
            epsilon_exponent: positive.then(|| epsilon_exponent(&eps_axis, &iters)).flatten().map(|f| f.slope),
            log_fit_r_squared: log_accuracy_fit(&eps_axis, &iters).map(|f| f.r_squared),
        });
    }
    ExperimentSummary {
        experiment: cfg.experiment.id().to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        search_factor: cfg.search_factor,
        cells,
        fits,
    }
}

pub fn summary_json(summary: &Summary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

/// What a plot shows on its vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Iterations,
    WallTime,
}

impl Metric {
    pub fn file_suffix(&self) -> &'static str {
        match self {
            Metric::Iterations => "iterations",
            Metric::WallTime => "time",
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Iterations => "iterations",
            Metric::WallTime => "time, s",
        }
    }

    fn value(&self, c: &CellSummary) -> f64 {
        match self {
            Metric::Iterations => c.mean_iterations,
            Metric::WallTime => c.mean_wall_time_s,
        }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: &[f64], log: bool) -> Self {
        let t = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) = values
            .iter()
            .map(|v| t(*v))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            lo = lo.min(0.0);
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i32..=self.hi as i32)
                .map(|k| (10f64.powi(k), format!("1e{k}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

/// A static plot of `metric` against `ε` (log scale, finer accuracies to the
/// right), one polyline per dimension.
pub fn svg_plot(summary: &ExperimentSummary, metric: Metric) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (80.0, 170.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let eps: Vec<f64> = summary.cells.iter().map(|c| c.eps).collect();
    let ys: Vec<f64> = summary.cells.iter().map(|c| metric.value(c)).collect();
    let x_axis = Axis::new(&eps, true);
    let y_axis = Axis::new(&ys, !ys.is_empty() && ys.iter().all(|v| *v > 0.0));
    let px = |e: f64| left + (1.0 - x_axis.frac(e)) * pw;
    let py = |v: f64| top + (1.0 - y_axis.frac(v)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}: {} vs accuracy</text>"#,
        left + pw / 2.0,
        summary.experiment,
        metric.label()
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in x_axis.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"##,
            top + ph,
            top + ph + 18.0
        );
    }
    for (v, label) in y_axis.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">ε (log scale)</text>"#,
        left + pw / 2.0,
        h - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        metric.label(),
        if y_axis.log { " (log scale)" } else { "" }
    );
    for (i, fit) in summary.fits.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = summary
            .cells
            .iter()
            .filter(|c| (c.dim_a, c.dim_b, c.dim_c) == (fit.dim_a, fit.dim_b, fit.dim_c))
            .map(|c| format!("{:.2},{:.2}", px(c.eps), py(metric.value(c))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = top + 16.0 + 18.0 * i as f64;
        let label = match (fit.dim_b, fit.dim_c) {
            (0, 0) => format!("n = {}", fit.dim_a),
            (b, 0) => format!("p = {}, q = {b}", fit.dim_a),
            (b, c) => format!("n = {}, m = {b}, N = {c}", fit.dim_a),
        };
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            left + pw + 10.0,
            left + pw + 30.0,
            left + pw + 36.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
