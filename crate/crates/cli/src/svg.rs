//! Static SVG line chart of learning curves.

use std::fmt::Write as _;
use std::path::Path;

use sparse_adapt::MseTrajectory;

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub db_scale: bool,
    pub title: String,
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Tick positions covering `[lo, hi]` with a 1/2/5 × 10^k spacing.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Builds the SVG document. Trajectories that diverged in every trial are skipped.
pub fn svg_string(trajectories: &[MseTrajectory], options: &SvgOptions) -> Result<String> {
    let curves: Vec<(&str, Vec<f64>)> = trajectories
        .iter()
        .filter(|t| !t.per_iteration_mse.is_empty())
        .map(|t| {
            let ys = if options.db_scale {
                t.per_iteration_mse_db.clone()
            } else {
                t.per_iteration_mse.clone()
            };
            (t.algorithm_label.as_str(), ys)
        })
        .collect();
    if curves.is_empty() {
        return Err(CliError::validation("no trajectory to plot"));
    }

    let n_max = curves.iter().map(|c| c.1.len()).max().unwrap_or(1);
    let (mut y_lo, mut y_hi) = curves
        .iter()
        .flat_map(|c| c.1.iter().copied())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_hi = n_max.max(2) as f64;
    let map_x = |k: f64| LEFT + (k - 1.0) / (x_hi - 1.0) * plot_w;
    let map_y = |v: f64| TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&options.title)
    );

    // axes and ticks
    let _ = writeln!(s, r#"<g class="axes" stroke="black" fill="none">"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/>"#
    );
    let x_ticks = nice_ticks(1.0, x_hi, 8);
    for &t in &x_ticks {
        let x = map_x(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
    }
    let y_ticks = nice_ticks(y_lo, y_hi, 6);
    for &t in &y_ticks {
        let y = map_y(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="tick-labels" fill="black">"#);
    for &t in &x_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            map_x(t),
            TOP + plot_h + 20.0,
            fmt_tick(t)
        );
    }
    for &t in &y_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            map_y(t) + 4.0,
            fmt_tick(t)
        );
    }
    let y_label = if options.db_scale {
        "Average MSE (dB)"
    } else {
        "Average MSE"
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Iterations</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{y_label}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (i, (label, ys)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            s,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1.5" points=""#,
            escape(label)
        );
        let mut first = true;
        for (k, &v) in ys.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{:.2},{:.2}", map_x(k as f64 + 1.0), map_y(v));
        }
        let _ = writeln!(s, r#""/>"#);
    }

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, (label, _)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 10.0 + 22.0 * i as f64;
        let x0 = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x0}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2.5"/>"#,
            x0 + 30.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            x0 + 38.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn render_svg(trajectories: &[MseTrajectory], path: &Path, options: &SvgOptions) -> Result<()> {
    let text = svg_string(trajectories, options)?;
    crate::write_file(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        assert_eq!(nice_ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let t = nice_ticks(1.0, 2000.0, 8);
        assert_eq!(t.first(), Some(&500.0));
        assert_eq!(t.last(), Some(&2000.0));
        assert!(nice_ticks(-31.3, -2.1, 6).iter().all(|v| (-31.3..=-2.1).contains(v)));
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
