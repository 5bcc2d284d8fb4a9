//! Self-contained SVG line and bar charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;

use super::IoError;
use crate::model::DispatchPlan;
use crate::scenarios::{InventoryMatrixResult, SweepResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Charts of a base run: file name, title, y-axis label.
pub const BASE_CHARTS: [(&str, &str, &str); 7] = [
    ("tg_output.svg", "Thermal generator output", "MW"),
    ("soc.svg", "Storage state of charge", "MWh"),
    ("rec_inventory.svg", "REC inventory level", "REC"),
    ("cer_inventory.svg", "CER inventory level", "tCO2"),
    (
        "electricity_trade.svg",
        "Electricity trade (sale > 0)",
        "MW",
    ),
    ("rec_trade.svg", "REC trade (sale > 0)", "REC"),
    ("cer_trade.svg", "CER trade (sale > 0)", "tCO2"),
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Data range padded so flat series still get a visible axis.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-9 * (1.0 + hi.abs()) {
        let pad = 0.5 * (1.0 + hi.abs() * 0.1);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    /// Header, title, axes, y ticks and labels. X ticks are drawn only when
    /// `x_ticks` is set.
    fn open(&self, title: &str, x_label: &str, y_label: &str, x_ticks: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        for v in ticks(self.y.0, self.y.1) {
            let y = self.py(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#e0e0e0"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        if x_ticks {
            for v in ticks(self.x.0, self.x.1) {
                let x = self.px(v);
                let _ = writeln!(
                    s,
                    r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="#000"/>"##,
                    y0 + 4.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                    y0 + 16.0,
                    fmt_tick(v)
                );
            }
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="#000"/>"##
        );
        if self.y.0 < 0.0 && self.y.1 > 0.0 {
            let y = self.py(0.0);
            let _ = writeln!(
                s,
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#888"/>"##
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
        s
    }
}

fn legend(s: &mut String, names: &[&str]) {
    if names.len() < 2 {
        return;
    }
    for (i, name) in names.iter().enumerate() {
        let x = LEFT + 10.0 + 110.0 * i as f64;
        let c = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{c}"/>"#,
            TOP - 12.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            x + 14.0,
            TOP - 3.0,
            escape(name)
        );
    }
}

/// Line chart of one or more `(name, points)` series.
pub(crate) fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(&str, Vec<(f64, f64)>)],
) -> String {
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (xl, xh) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (x, _)| {
        (l.min(*x), h.max(*x))
    });
    let x = if xh > xl {
        (xl, xh)
    } else {
        (xl - 0.5, xl + 0.5)
    };
    let frame = Frame {
        x,
        y: range(all().map(|(_, y)| *y)),
    };
    let mut s = frame.open(title, x_label, y_label, true);
    for (i, (_, pts)) in series.iter().enumerate() {
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path.join(" "),
            PALETTE[i % PALETTE.len()]
        );
        if pts.len() <= 40 {
            for p in &path {
                let (px, py) = p.split_once(',').expect("formatted as x,y");
                let _ = writeln!(
                    s,
                    r#"<circle cx="{px}" cy="{py}" r="2.5" fill="{}"/>"#,
                    PALETTE[i % PALETTE.len()]
                );
            }
        }
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Grouped bar chart: one group per category, one bar per series.
pub(crate) fn bar_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    categories: &[String],
    series: &[(&str, Vec<f64>)],
) -> String {
    let n = categories.len().max(1) as f64;
    let frame = Frame {
        x: (0.0, n),
        y: range(
            series
                .iter()
                .flat_map(|(_, v)| v.iter().copied())
                .chain([0.0]),
        ),
    };
    let mut s = frame.open(title, x_label, y_label, false);
    let group = frame.px(1.0) - frame.px(0.0);
    let bar = 0.8 * group / series.len().max(1) as f64;
    let base = frame.py(0.0);
    for (k, (_, vals)) in series.iter().enumerate() {
        for (i, v) in vals.iter().enumerate() {
            let x = frame.px(i as f64) + 0.1 * group + bar * k as f64;
            let y = frame.py(*v);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="{bar:.2}" height="{:.2}" fill="{}"/>"#,
                y.min(base),
                (y - base).abs(),
                PALETTE[k % PALETTE.len()]
            );
        }
    }
    for (i, c) in categories.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            frame.px(i as f64 + 0.5),
            HEIGHT - BOTTOM + 16.0,
            escape(c)
        );
    }
    legend(&mut s, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

fn write(dir: &Path, name: &str, body: String) -> Result<PathBuf, IoError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| IoError::io(&path, e))?;
    Ok(path)
}

fn hourly(v: &[f64]) -> Vec<(f64, f64)> {
    v.iter()
        .enumerate()
        .map(|(t, y)| ((t + 1) as f64, *y))
        .collect()
}

/// The seven dispatch and trading charts of a base run. An empty plan
/// writes nothing and logs a warning.
pub fn emit_plots(plan: &DispatchPlan, out_dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    if plan.horizon() == 0 {
        warn!("empty plan, no charts written");
        return Ok(Vec::new());
    }
    let series = [
        &plan.g,
        &plan.soc,
        &plan.rec_level,
        &plan.cer_level,
        &plan.grid,
        &plan.rec_trade,
        &plan.cer_trade,
    ];
    BASE_CHARTS
        .iter()
        .zip(series)
        .map(|((file, title, unit), s)| {
            write(
                out_dir,
                file,
                line_chart(title, "hour", unit, &[("", hourly(s))]),
            )
        })
        .collect()
}

/// Daily REC and CER trading revenue of every inventory configuration.
pub fn emit_matrix_plots(
    m: &InventoryMatrixResult,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, IoError> {
    let days = m.cells.first().map_or(0, |c| c.daily.len());
    if days == 0 {
        warn!("empty inventory matrix, no charts written");
        return Ok(Vec::new());
    }
    let categories: Vec<String> = (1..=days).map(|d| d.to_string()).collect();
    let mut out = Vec::new();
    for (k, (file, title, unit)) in [
        ("daily_rec_profit.svg", "Daily REC trading revenue", "$"),
        ("daily_cer_profit.svg", "Daily CER trading revenue", "$"),
    ]
    .into_iter()
    .enumerate()
    {
        let series: Vec<(&str, Vec<f64>)> = m
            .cells
            .iter()
            .map(|c| (c.cell.name(), c.daily.iter().map(|d| d[k]).collect()))
            .collect();
        out.push(write(
            out_dir,
            file,
            bar_chart(title, "day", unit, &categories, &series),
        )?);
    }
    Ok(out)
}

/// One chart per revenue component, named `<stem>_<component>.svg`.
pub fn emit_sweep_plots(
    sweep: &SweepResult,
    out_dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, IoError> {
    let solved: Vec<_> = sweep
        .points
        .iter()
        .filter_map(|p| p.breakdown.map(|b| (p.value, b.components())))
        .collect();
    if solved.is_empty() {
        warn!("sweep has no solved points, no charts written");
        return Ok(Vec::new());
    }
    let param = sweep.param.name();
    (0..5)
        .map(|k| {
            let name = solved[0].1[k].0;
            let pts = solved.iter().map(|(v, c)| (*v, c[k].1)).collect();
            write(
                out_dir,
                &format!("{stem}_{name}.svg"),
                line_chart(
                    &format!("{name} against {param}"),
                    param,
                    "$",
                    &[(name, pts)],
                ),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_cover_the_range() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let t = ticks(-3.2, 187.0);
        assert!(t.len() >= 3 && t.len() <= 7, "{t:?}");
        assert!(t.iter().all(|v| (-3.2..=187.0).contains(v)));
    }

    #[test]
    fn charts_are_well_formed() {
        let s = line_chart(
            "a < b",
            "x",
            "y",
            &[
                ("one", vec![(0.0, 1.0), (1.0, 1.0)]),
                ("two", vec![(0.0, 0.0)]),
            ],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 3);
        let b = bar_chart(
            "bars",
            "day",
            "$",
            &["1".into(), "2".into()],
            &[("a", vec![1.0, -2.0])],
        );
        assert_eq!(b.matches("<rect").count(), 3);
        assert!(!b.contains("NaN"));
    }
}
