//! Stage-wise utility plots as standalone SVG, with the plotted data as CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::episode::EpisodeReport;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#17becf"];
const MARKER: &str = "#d62728";

/// One polyline: leader stage utility per round, with rounds where the follower deviated.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub utilities: Vec<f64>,
    pub disturbed_rounds: Vec<usize>,
}

impl PlotSeries {
    pub fn from_report(label: impl Into<String>, report: &EpisodeReport) -> Self {
        PlotSeries {
            label: label.into(),
            utilities: report.leader_utilities(),
            disturbed_rounds: report.disturbed_rounds(),
        }
    }
}

#[derive(Serialize)]
struct PlotRow<'a> {
    series: &'a str,
    round: usize,
    utility: f64,
    disturbed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Render the series as an SVG document. Rounds are 1-based on the x axis.
pub fn render_svg(series: &[PlotSeries]) -> String {
    let rounds = series.iter().map(|s| s.utilities.len()).max().unwrap_or(0).max(1);
    let values: Vec<f64> = series.iter().flat_map(|s| s.utilities.iter().copied()).collect();
    let (mut lo, mut hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x = |round: usize| {
        if rounds == 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * (round - 1) as f64 / (rounds - 1) as f64
        }
    };
    let y = |v: f64| MARGIN_Y + plot_h * (hi - v) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN_LEFT, MARGIN_LEFT + plot_w, MARGIN_Y, MARGIN_Y + plot_h);
    let _ = writeln!(svg, r#"<path d="M{x0:.2} {y0:.2} V{y1:.2} H{x1:.2}" fill="none" stroke="black"/>"#);
    for r in 1..=rounds {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{r}</text>"#,
            x(r),
            y1 + 16.0
        );
    }
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, x0 - 6.0, y(v) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">round</text>"#, x0 + plot_w / 2.0, HEIGHT - 6.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">stage utility</text>"#,
        y0 + plot_h / 2.0,
        y0 + plot_h / 2.0
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let label = escape(&s.label);
        let points: Vec<String> =
            s.utilities.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x(i + 1), y(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-label="{label}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        for (i, &v) in s.utilities.iter().enumerate() {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x(i + 1), y(v));
        }
        for &r in s.disturbed_rounds.iter().filter(|&&r| r >= 1 && r <= s.utilities.len()) {
            let (cx, cy) = (x(r), y(s.utilities[r - 1]));
            let _ = writeln!(
                svg,
                r#"<path class="disturbance" data-round="{r}" d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} Z" fill="{MARKER}"/>"#,
                cx - 6.0,
                cy - 14.0,
                cx + 6.0,
                cy - 14.0,
                cx,
                cy - 4.0
            );
        }
        let ly = MARGIN_Y + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            x1 + 12.0,
            x1 + 32.0,
            x1 + 38.0,
            ly + 4.0
        );
    }
    if series.iter().any(|s| !s.disturbed_rounds.is_empty()) {
        let ly = MARGIN_Y + 18.0 * series.len() as f64;
        let _ = writeln!(
            svg,
            r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2} Z" fill="{MARKER}"/><text x="{:.2}" y="{:.2}">deviation</text>"#,
            x1 + 16.0,
            ly - 5.0,
            x1 + 28.0,
            ly - 5.0,
            x1 + 22.0,
            ly + 5.0,
            x1 + 38.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_plot_csv<W: std::io::Write>(series: &[PlotSeries], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if series.iter().all(|s| s.utilities.is_empty()) {
        w.write_record(["series", "round", "utility", "disturbed"])?;
    }
    for s in series {
        for (i, &utility) in s.utilities.iter().enumerate() {
            let round = i + 1;
            w.serialize(PlotRow { series: &s.label, round, utility, disturbed: s.disturbed_rounds.contains(&round) })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write the SVG to `path` and its data to the same path with a `.csv`
/// extension. Returns the CSV path.
pub fn emit_utility_plot(series: &[PlotSeries], path: impl AsRef<Path>) -> Result<PathBuf> {
    if series.is_empty() {
        return Err(Error::Validation("a plot needs at least one report".into()));
    }
    let path = path.as_ref();
    std::fs::write(path, render_svg(series))?;
    let csv_path = path.with_extension("csv");
    write_plot_csv(series, std::fs::File::create(&csv_path)?)?;
    Ok(csv_path)
}
