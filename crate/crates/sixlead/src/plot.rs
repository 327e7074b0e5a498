//! Minimal deterministic SVG emission for reports.
//!
//! Charts are standalone SVG documents with the plotted values duplicated
//! in a machine-readable comment, so a figure can always be traced back to
//! its numbers. Output depends only on the input data: no timestamps, no
//! randomness, fixed float formatting.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const PANEL_WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 220.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 35.0;

/// One named line in a chart.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

/// One stacked panel: a caption, its series, and point markers.
pub struct Panel<'a> {
    pub caption: &'a str,
    pub series: Vec<Series<'a>>,
    pub markers: &'a [(f64, f64)],
}

fn bounds(panel: &Panel) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for s in &panel.series {
        for &(x, y) in s.points {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }
    for &(x, y) in panel.markers {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    if !min_x.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if max_x - min_x < 1e-12 {
        min_x -= 0.5;
        max_x += 0.5;
    }
    if max_y - min_y < 1e-12 {
        min_y -= 0.5;
        max_y += 0.5;
    }
    let pad_y = 0.05 * (max_y - min_y);
    (min_x, max_x, min_y - pad_y, max_y + pad_y)
}

/// Renders stacked panels as one SVG document.
pub fn render(title: &str, x_label: &str, panels: &[Panel]) -> String {
    let total_height = MARGIN_TOP + panels.len() as f64 * PANEL_HEIGHT + MARGIN_BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PANEL_WIDTH}\" height=\"{total_height}\" viewBox=\"0 0 {PANEL_WIDTH} {total_height}\">"
    );
    let _ = writeln!(
        svg,
        "<style>text{{font-family:monospace;font-size:12px}}.cap{{font-size:13px;font-weight:bold}}</style>"
    );
    let _ = writeln!(
        svg,
        "<text class=\"cap\" x=\"{}\" y=\"18\">{}</text>",
        MARGIN_LEFT,
        escape(title)
    );

    for (panel_idx, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + panel_idx as f64 * PANEL_HEIGHT + 18.0;
        let bottom = MARGIN_TOP + (panel_idx + 1) as f64 * PANEL_HEIGHT - 12.0;
        let left = MARGIN_LEFT;
        let right = PANEL_WIDTH - MARGIN_RIGHT;
        let (min_x, max_x, min_y, max_y) = bounds(panel);
        let sx = |x: f64| left + (x - min_x) / (max_x - min_x) * (right - left);
        let sy = |y: f64| bottom - (y - min_y) / (max_y - min_y) * (bottom - top);

        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            left,
            top - 5.0,
            escape(panel.caption)
        );
        // frame and y extremes
        let _ = writeln!(
            svg,
            "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
            right - left,
            bottom - top
        );
        let _ = writeln!(
            svg,
            "<text x=\"4\" y=\"{:.2}\">{}</text>",
            top + 10.0,
            fmt_val(max_y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"4\" y=\"{:.2}\">{}</text>",
            bottom,
            fmt_val(min_y)
        );

        for (series_idx, series) in panel.series.iter().enumerate() {
            if series.points.is_empty() {
                continue;
            }
            let color = PALETTE[series_idx % PALETTE.len()];
            let mut path = String::new();
            for &(x, y) in series.points {
                let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>",
                path.trim_end()
            );
            // legend entry
            let lx = right - 150.0;
            let ly = top + 14.0 * (series_idx as f64 + 1.0);
            let _ = writeln!(
                svg,
                "<text x=\"{lx}\" y=\"{ly}\" fill=\"{color}\">{}</text>",
                escape(series.name)
            );
        }
        for &(x, y) in panel.markers {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#d62728\"/>",
                sx(x),
                sy(y)
            );
        }
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\">{}</text>",
        PANEL_WIDTH / 2.0 - 30.0,
        total_height - 8.0,
        escape(x_label)
    );

    // embedded numeric ground truth
    for panel in panels {
        for series in &panel.series {
            let mut data = String::new();
            for &(x, y) in series.points {
                let _ = write!(data, "{x}:{y};");
            }
            let _ = writeln!(
                svg,
                "<!-- data {} | {} | {} -->",
                escape(panel.caption),
                escape(series.name),
                data
            );
        }
        if !panel.markers.is_empty() {
            let mut data = String::new();
            for &(x, y) in panel.markers {
                let _ = write!(data, "{x}:{y};");
            }
            let _ = writeln!(svg, "<!-- markers {} | {} -->", escape(panel.caption), data);
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Single-panel convenience wrapper.
pub fn line_chart(
    title: &str,
    x_label: &str,
    series: Vec<Series<'_>>,
    markers: &[(f64, f64)],
) -> String {
    render(
        title,
        x_label,
        &[Panel {
            caption: title,
            series,
            markers,
        }],
    )
}

fn fmt_val(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Pairs sample indices with values for plotting.
pub fn indexed(values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64, v))
        .collect()
}
