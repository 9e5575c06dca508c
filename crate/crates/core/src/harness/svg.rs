//! Minimal deterministic SVG line charts. No text layout engine, no
//! dependencies: fixed canvas, monospace labels, and enough ticks to
//! read off decades. Log axes drop nonpositive points, which for our
//! data only happens when a gradient norm hits exactly zero.

use crate::error::{LionError, Result};
use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 830.0;
const PLOT_TOP: f64 = 50.0;
const PLOT_BOTTOM: f64 = 460.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs();
    if (0.01..10000.0).contains(&mag) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Data range on one axis after the log transform (when active).
struct Axis {
    min: f64,
    max: f64,
    log: bool,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>, log: bool) -> Result<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            let t = if log {
                if v <= 0.0 {
                    continue;
                }
                v.log10()
            } else {
                v
            };
            if t.is_finite() {
                min = min.min(t);
                max = max.max(t);
            }
        }
        if !min.is_finite() || !max.is_finite() {
            return Err(LionError::InvalidInput(
                "chart axis has no plottable values".into(),
            ));
        }
        if min == max {
            min -= 1.0;
            max += 1.0;
        } else {
            let pad = 0.05 * (max - min);
            min -= pad;
            max += pad;
        }
        Ok(Self { min, max, log })
    }

    fn transform(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        t.is_finite().then_some((t - self.min) / (self.max - self.min))
    }

    /// Tick positions in transformed space, paired with labels in data
    /// space. Log axes prefer whole decades when at least two fit.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let lo = self.min.ceil() as i64;
            let hi = self.max.floor() as i64;
            if hi - lo >= 1 {
                return (lo..=hi)
                    .map(|e| {
                        let frac = (e as f64 - self.min) / (self.max - self.min);
                        (frac, format!("1e{e}"))
                    })
                    .collect();
            }
        }
        (0..=4)
            .map(|i| {
                let frac = i as f64 / 4.0;
                let t = self.min + frac * (self.max - self.min);
                let value = if self.log { 10f64.powf(t) } else { t };
                (frac, format_tick(value))
            })
            .collect()
    }
}

/// Renders the chart to a standalone SVG document string.
pub fn render_chart(spec: &ChartSpec) -> Result<String> {
    if spec.series.is_empty() || spec.series.iter().all(|s| s.points.is_empty()) {
        return Err(LionError::InvalidInput("chart has no series".into()));
    }
    let xs = Axis::from_values(
        spec.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        spec.log_x,
    )?;
    let ys = Axis::from_values(
        spec.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
        spec.log_y,
    )?;
    let px = |frac: f64| PLOT_LEFT + frac * (PLOT_RIGHT - PLOT_LEFT);
    let py = |frac: f64| PLOT_BOTTOM - frac * (PLOT_BOTTOM - PLOT_TOP);

    let mut out = String::with_capacity(16 * 1024);
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="28" font-family="monospace" font-size="15" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        escape(&spec.title)
    );

    for (frac, label) in xs.ticks() {
        let x = px(frac);
        let _ = write!(
            out,
            r##"<line x1="{x:.2}" y1="{PLOT_TOP}" x2="{x:.2}" y2="{PLOT_BOTTOM}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = write!(
            out,
            r#"<text x="{x:.2}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{}</text>"#,
            PLOT_BOTTOM + 18.0,
            escape(&label)
        );
    }
    for (frac, label) in ys.ticks() {
        let y = py(frac);
        let _ = write!(
            out,
            r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="monospace" font-size="12" text-anchor="end">{}</text>"#,
            PLOT_LEFT - 6.0,
            y + 4.0,
            escape(&label)
        );
    }
    let _ = write!(
        out,
        r##"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{}" height="{}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="13" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x_label)
    );
    let _ = write!(
        out,
        r#"<text x="18" y="{}" font-family="monospace" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        escape(&spec.y_label)
    );

    for (idx, series) in spec.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut coords = String::new();
        for &(x, y) in &series.points {
            if let (Some(fx), Some(fy)) = (xs.transform(x), ys.transform(y)) {
                let _ = write!(coords, "{:.2},{:.2} ", px(fx), py(fy));
            }
        }
        if coords.is_empty() {
            continue;
        }
        let dash = if series.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = write!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
            coords.trim_end()
        );
    }

    let legend_x = PLOT_RIGHT - 190.0;
    for (idx, series) in spec.series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let y = PLOT_TOP + 16.0 + 18.0 * idx as f64;
        let dash = if series.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = write!(
            out,
            r#"<line x1="{legend_x}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
            legend_x + 24.0
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{:.2}" font-family="monospace" font-size="12">{}</text>"#,
            legend_x + 30.0,
            y + 4.0,
            escape(&series.label)
        );
    }
    out.push_str("</svg>");
    Ok(out)
}
