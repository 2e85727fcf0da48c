//! Static SVG 1.1 charts. Every plotted number is also written to a
//! `data-value` attribute with the same fixed-precision formatting as the
//! CSV exports, so the two can be compared byte for byte.

use std::fmt::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use rnndcor::analysis::{fixed, HeatmapGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    BarProfile,
    Heatmap,
    ForecastOverlay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgChart {
    pub text: String,
    pub kind: ChartKind,
    /// File name of the CSV holding the plotted numbers.
    pub source: String,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str, source: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" data-source="{}">"#,
        escape(source)
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        width / 2.0,
        escape(title)
    );
}

/// Grouped bars, one group per label. Series may hold negative values (the
/// ACF does); the axis always spans at least [0, 1].
pub fn render_bar_chart(
    title: &str,
    labels: &[String],
    series: &[(&str, &[f64])],
    precision: usize,
    source: &str,
) -> Result<SvgChart> {
    if labels.is_empty() || series.is_empty() {
        bail!("cannot draw an empty profile");
    }
    for (name, values) in series {
        if values.len() != labels.len() {
            bail!("series {name} has {} values for {} labels", values.len(), labels.len());
        }
        if values.iter().any(|v| !v.is_finite()) {
            bail!("series {name} contains non-finite values");
        }
    }
    let lo = series.iter().flat_map(|(_, v)| v.iter()).fold(0.0f64, |a, b| a.min(*b));
    let hi = series.iter().flat_map(|(_, v)| v.iter()).fold(1.0f64, |a, b| a.max(*b));
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let y_of = |v: f64| MARGIN + (hi - v) / (hi - lo) * plot_h;
    let group_w = plot_w / labels.len() as f64;
    let bar_w = group_w * 0.8 / series.len() as f64;

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title, source);
    let zero = y_of(0.0);
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#444"/>"##,
        WIDTH - MARGIN
    );
    for (tick, label) in [(lo, fixed(lo, 2)), (hi, fixed(hi, 2))] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{label}</text>"#,
            MARGIN - 4.0,
            y_of(tick) + 3.0
        );
    }
    for (s, (name, values)) in series.iter().enumerate() {
        let colour = PALETTE[s % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="series" data-series="{}" fill="{colour}">"#, escape(name));
        for (i, v) in values.iter().enumerate() {
            let x = MARGIN + i as f64 * group_w + group_w * 0.1 + s as f64 * bar_w;
            let (top, bottom) = if *v >= 0.0 { (y_of(*v), zero) } else { (zero, y_of(*v)) };
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{x:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" data-label="{}" data-value="{}"/>"#,
                bottom - top,
                escape(&labels[i]),
                fixed(*v, precision)
            );
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            MARGIN - 10.0 + 14.0 * s as f64,
            escape(name)
        );
    }
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            MARGIN + (i as f64 + 0.5) * group_w,
            HEIGHT - MARGIN + 14.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(SvgChart {
        text: out,
        kind: ChartKind::BarProfile,
        source: source.to_string(),
    })
}

/// Colour for a value in [0, 1]: linear ramp from near-white (0) to dark
/// blue (1), so lightness falls monotonically with the value.
pub fn colour(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// One cell per grid entry, rows are layers of model a (top to bottom),
/// columns layers of model b. `caption` lines go under the plot.
pub fn render_heatmap(
    grid: &HeatmapGrid,
    caption: &[String],
    precision: usize,
    source: &str,
) -> Result<SvgChart> {
    let (rows, cols) = grid.grid.dim();
    if rows == 0 || cols == 0 {
        bail!("cannot draw an empty grid");
    }
    if grid.grid.iter().any(|v| !v.is_finite()) {
        bail!("grid contains non-finite values");
    }
    let cell = (360.0 / rows.max(cols) as f64).min(36.0);
    let left = 70.0;
    let top = 50.0;
    let legend_x = left + cell * cols as f64 + 30.0;
    let width = legend_x + 80.0;
    let height = top + cell * rows as f64 + 40.0 + 16.0 * caption.len() as f64;

    let mut out = String::new();
    let title = format!("{} vs {}", grid.model_a, grid.model_b);
    header(&mut out, width, height, &title, source);
    let _ = writeln!(out, r#"<g class="grid">"#);
    for r in 0..rows {
        for c in 0..cols {
            let v = grid.grid[[r, c]];
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="{}" data-row="{}" data-col="{}" data-value="{}"/>"#,
                left + c as f64 * cell,
                top + r as f64 * cell,
                colour(v),
                r + 1,
                c + 1,
                fixed(v, precision)
            );
        }
    }
    let _ = writeln!(out, "</g>");
    for r in 0..rows {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="9">{}</text>"#,
            left - 4.0,
            top + (r as f64 + 0.65) * cell,
            r + 1
        );
    }
    for c in 0..cols {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="9">{}</text>"#,
            left + (c as f64 + 0.5) * cell,
            top - 4.0,
            c + 1
        );
    }
    // legend: 10 steps from 1 (top) to 0 (bottom)
    let legend_h = cell * rows as f64;
    let _ = writeln!(out, r#"<g class="legend">"#);
    for k in 0..10 {
        let v = 1.0 - (k as f64 + 0.5) / 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{legend_x:.2}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            top + k as f64 * legend_h / 10.0,
            legend_h / 10.0,
            colour(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text class="legend-max" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">1</text>"#,
        legend_x + 20.0,
        top + 8.0
    );
    let _ = writeln!(
        out,
        r#"<text class="legend-min" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10">0</text>"#,
        legend_x + 20.0,
        top + legend_h
    );
    let _ = writeln!(out, "</g>");
    for (i, line) in caption.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="caption" x="{left}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            top + legend_h + 24.0 + 16.0 * i as f64,
            escape(line)
        );
    }
    out.push_str("</svg>\n");
    Ok(SvgChart {
        text: out,
        kind: ChartKind::Heatmap,
        source: source.to_string(),
    })
}

/// Actual and predicted values as two polylines.
pub fn render_forecast(
    title: &str,
    actual: &[f64],
    predicted: &[f64],
    precision: usize,
    source: &str,
) -> Result<SvgChart> {
    if actual.is_empty() || actual.len() != predicted.len() {
        bail!(
            "forecast needs equal non-empty series, got {} and {}",
            actual.len(),
            predicted.len()
        );
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        bail!("forecast contains non-finite values");
    }
    let lo = actual.iter().chain(predicted).fold(f64::INFINITY, |a, b| a.min(*b));
    let mut hi = actual.iter().chain(predicted).fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    if hi == lo {
        hi = lo + 1.0;
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let step = if actual.len() > 1 { plot_w / (actual.len() - 1) as f64 } else { 0.0 };
    let point = |i: usize, v: f64| {
        format!("{:.2},{:.2}", MARGIN + i as f64 * step, MARGIN + (hi - v) / (hi - lo) * plot_h)
    };

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title, source);
    for (s, (name, values)) in [("actual", actual), ("predicted", predicted)].iter().enumerate() {
        let colour = PALETTE[s];
        let pts: Vec<String> = values.iter().enumerate().map(|(i, v)| point(i, *v)).collect();
        let data: Vec<String> = values.iter().map(|v| fixed(*v, precision)).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-series="{name}" fill="none" stroke="{colour}" stroke-width="1" points="{}" data-values="{}"/>"#,
            pts.join(" "),
            data.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{colour}">{name}</text>"#,
            WIDTH - MARGIN - 80.0,
            MARGIN - 10.0 + 14.0 * s as f64
        );
    }
    for (v, y) in [(lo, HEIGHT - MARGIN), (hi, MARGIN)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            MARGIN - 4.0,
            y + 3.0,
            fixed(v, 2)
        );
    }
    out.push_str("</svg>\n");
    Ok(SvgChart {
        text: out,
        kind: ChartKind::ForecastOverlay,
        source: source.to_string(),
    })
}
