//! CSV tables and SVG charts of a results table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::Estimator;
use super::runner::{ResultsTable, TrialRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "scenario,M,spacing_lambda,input_evm_db,estimator,mean_output_evm_db,median_output_evm_db,std_db,mean_loc_err_m,trials";

// `Display` for f64 is the shortest round-trip form and prints -inf as "-inf".
fn num(v: f64) -> String {
    format!("{v}")
}

pub fn results_csv(table: &ResultsTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.antenna_count,
            num(r.spacing_lambda),
            num(r.input_evm_db),
            r.estimator,
            num(r.mean_output_evm_db),
            num(r.median_output_evm_db),
            num(r.std_db),
            r.mean_loc_err_m.map(num).unwrap_or_default(),
            r.trials
        );
    }
    out
}

/// Per-trial records, one row per (trial, input EVM, estimator). Wall-clock
/// times are left out so the file is reproducible.
pub fn trials_csv(trials: &[TrialRecord]) -> String {
    let mut out = String::from(
        "scenario,trial,ue_x_m,ue_y_m,input_evm_db,estimator,output_evm_db,loc_err_m\n",
    );
    for t in trials {
        for o in &t.outcomes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                t.scenario,
                t.trial_index,
                num(t.ue_location.x),
                num(t.ue_location.y),
                num(t.input_evm_db),
                o.estimator,
                num(o.output_evm_db),
                o.location_error_m.map(num).unwrap_or_default()
            );
        }
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::config("estimators", "results table is empty"));
    }
    write(path, &results_csv(table))
}

pub fn emit_trials_csv(trials: &[TrialRecord], path: &Path) -> Result<()> {
    write(path, &trials_csv(trials))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

fn nice_bounds(lo: f64, hi: f64) -> (f64, f64) {
    let (lo, hi) = if hi - lo < 1e-9 {
        (lo - 5.0, hi + 5.0)
    } else {
        (lo, hi)
    };
    ((lo / 5.0).floor() * 5.0, (hi / 5.0).ceil() * 5.0)
}

/// SVG chart of one scenario: mean output EVM against input EVM per
/// estimator, plus the identity line. Points with a non-finite input EVM
/// (the noiseless sentinel) cannot be placed and are left out.
pub fn scenario_svg(table: &ResultsTable, scenario: &str) -> Result<String> {
    let rows: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.scenario == scenario && r.input_evm_db.is_finite())
        .collect();
    let mut estimators: Vec<Estimator> = rows.iter().map(|r| r.estimator).collect();
    estimators.sort_by_key(|e| e.name());
    estimators.dedup();
    if estimators.is_empty() {
        return Err(Error::config(
            "estimators",
            format!("no plottable rows for scenario `{scenario}`"),
        ));
    }
    let xs = rows.iter().map(|r| r.input_evm_db);
    let (x_lo, x_hi) = nice_bounds(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let ys = rows
        .iter()
        .map(|r| r.mean_output_evm_db)
        .chain([x_lo, x_hi]);
    let (y_lo, y_hi) = nice_bounds(
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{scenario}</text>"#,
        LEFT + plot_w / 2.0
    );
    // grid and tick labels every 5 dB
    let mut x = x_lo;
    while x <= x_hi + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#ddd"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4}</text>"##,
            px(x),
            TOP,
            TOP + plot_h,
            TOP + plot_h + 16.0,
            x
        );
        x += 5.0;
    }
    let mut y = y_lo;
    let y_step = if y_hi - y_lo > 60.0 { 10.0 } else { 5.0 };
    while y <= y_hi + 1e-9 {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="#ddd"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5}</text>"##,
            LEFT,
            py(y),
            LEFT + plot_w,
            LEFT - 6.0,
            py(y) + 4.0,
            y
        );
        y += y_step;
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">input EVM (dB)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">mean output EVM (dB)</text>"#,
        TOP + plot_h / 2.0
    );

    let legend = |s: &mut String, i: usize, color: &str, dash: &str, label: &str| {
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        );
    };
    let dash = r#" stroke-dasharray="6 4""#;
    let _ = writeln!(
        s,
        r##"<polyline class="identity" points="{:.2},{:.2} {:.2},{:.2}" fill="none" stroke="#888" stroke-width="1.5"{dash}/>"##,
        px(x_lo),
        py(x_lo),
        px(x_hi),
        py(x_hi)
    );
    legend(&mut s, 0, "#888", dash, "identity");
    for (i, e) in estimators.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.estimator == *e)
            .map(|r| (r.input_evm_db, r.mean_output_evm_db))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="estimator" data-estimator="{e}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        legend(&mut s, i + 1, color, "", e.name());
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes `<out_dir>/<scenario>.svg` for every scenario and returns the paths.
pub fn emit_plot(table: &ResultsTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let ids = table.scenario_ids();
    if ids.is_empty() {
        return Err(Error::config("estimators", "results table is empty"));
    }
    ids.into_iter()
        .map(|id| {
            let path = out_dir.join(format!("{id}.svg"));
            write(&path, &scenario_svg(table, id)?)?;
            Ok(path)
        })
        .collect()
}
