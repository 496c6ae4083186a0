use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::DataError;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 210.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 40.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Simulated,
    /// Dashed with point markers.
    Historical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: LineStyle,
}

impl ChartSeries {
    pub fn simulated(
        label: impl Into<String>,
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        Self {
            label: label.into(),
            points: points.into_iter().collect(),
            style: LineStyle::Simulated,
        }
    }

    pub fn historical(
        label: impl Into<String>,
        points: impl IntoIterator<Item = (f64, f64)>,
    ) -> Self {
        Self {
            label: label.into(),
            points: points.into_iter().collect(),
            style: LineStyle::Historical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<ChartSeries>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chart {
    pub title: String,
    pub panels: Vec<Panel>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = span / target_ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn format_tick(v: f64) -> String {
    let a = v.abs();
    if a >= 1e9 {
        format!("{:.2}B", v / 1e9)
    } else if a >= 1e6 {
        format!("{:.2}M", v / 1e6)
    } else if a >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if a >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Renders an SVG 1.1 document with a 960x540 viewBox. Panels are stacked
/// vertically and share the year axis range.
pub fn render_svg(chart: &Chart) -> String {
    let mut out = String::new();
    writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&chart.title)
    )
    .unwrap();

    let x_ext = extent(
        chart
            .panels
            .iter()
            .flat_map(|p| p.series.iter())
            .flat_map(|s| s.points.iter().map(|p| p.0)),
    );
    let n = chart.panels.len().max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let panel_h = (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM - PANEL_GAP * (n - 1.0)) / n;

    let mut color_idx = 0usize;
    for (pi, panel) in chart.panels.iter().enumerate() {
        let top = MARGIN_TOP + pi as f64 * (panel_h + PANEL_GAP);
        let bottom = top + panel_h;
        writeln!(
            out,
            r#"<g class="panel">
<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>
<line x1="{MARGIN_LEFT}" y1="{bottom:.2}" x2="{}" y2="{bottom:.2}" stroke="black"/>
<line x1="{MARGIN_LEFT}" y1="{top:.2}" x2="{MARGIN_LEFT}" y2="{bottom:.2}" stroke="black"/>
<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            top - 6.0,
            escape(&panel.title),
            MARGIN_LEFT + plot_w,
            (top + bottom) / 2.0,
            (top + bottom) / 2.0,
            escape(&panel.y_label),
        )
        .unwrap();

        let y_ext = extent(
            panel
                .series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        );
        let (Some((x0, x1)), Some((mut y0, mut y1))) = (x_ext, y_ext) else {
            out.push_str("</g>\n");
            continue;
        };
        let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
        if y1 - y0 <= f64::EPSILON * y1.abs().max(1.0) {
            y0 -= 1.0_f64.max(y0.abs() * 0.05);
            y1 += 1.0_f64.max(y1.abs() * 0.05);
        } else {
            let pad = (y1 - y0) * 0.05;
            y0 -= pad;
            y1 += pad;
        }
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * panel_h;

        let xstep = nice_step(x1 - x0, 6.0).max(1.0);
        let mut xt = (x0 / xstep).ceil() * xstep;
        while xt <= x1 + 1e-9 {
            writeln!(
                out,
                r#"<line x1="{0:.2}" y1="{bottom:.2}" x2="{0:.2}" y2="{1:.2}" stroke="black"/><text x="{0:.2}" y="{2:.2}" text-anchor="middle">{3}</text>"#,
                sx(xt),
                bottom + 4.0,
                bottom + 17.0,
                format_tick(xt)
            )
            .unwrap();
            xt += xstep;
        }
        let ystep = nice_step(y1 - y0, 4.0);
        let mut yt = (y0 / ystep).ceil() * ystep;
        while yt <= y1 + ystep * 1e-9 {
            writeln!(
                out,
                r##"<line x1="{0}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#dddddd"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"##,
                MARGIN_LEFT,
                sy(yt),
                MARGIN_LEFT + plot_w,
                MARGIN_LEFT - 6.0,
                sy(yt) + 4.0,
                format_tick(yt)
            )
            .unwrap();
            yt += ystep;
        }

        for (si, s) in panel.series.iter().enumerate() {
            let color = PALETTE[color_idx % PALETTE.len()];
            color_idx += 1;
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = match s.style {
                LineStyle::Simulated => "",
                LineStyle::Historical => r#" stroke-dasharray="6 4""#,
            };
            writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
                pts.join(" ")
            )
            .unwrap();
            if s.style == LineStyle::Historical {
                for &(x, y) in &s.points {
                    writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        sx(x),
                        sy(y)
                    )
                    .unwrap();
                }
            }
            let ly = top + 14.0 + si as f64 * 18.0;
            let lx = MARGIN_LEFT + plot_w + 16.0;
            writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly:.2}" x2="{}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{:.2}">{}</text>"#,
                lx + 28.0,
                lx + 34.0,
                ly + 4.0,
                escape(&s.label)
            )
            .unwrap();
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(chart: &Chart, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    fs::write(path, render_svg(chart)).map_err(|e| DataError::io(path, e))
}
