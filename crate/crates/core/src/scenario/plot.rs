//! Minimal deterministic SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ScenarioError, Table};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Which columns of a table to draw: one polyline per `y` column against
/// the shared `x` column.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub y: Vec<String>,
}

impl PlotSpec {
    pub fn new(title: &str, x: &str, y: &[&str]) -> Self {
        Self {
            title: title.to_string(),
            x: x.to_string(),
            y: y.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions covering `[lo, hi]` on a 1-2-5 step, and the number of
/// decimals needed to print them.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders the plot as SVG text. A table with no rows produces axes only.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String, ScenarioError> {
    let xs = table
        .column(&spec.x)
        .ok_or_else(|| ScenarioError::MissingColumn(spec.x.clone()))?;
    let ys = spec
        .y
        .iter()
        .map(|name| table.column(name).ok_or_else(|| ScenarioError::MissingColumn(name.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let (x0, x1) = range(xs.iter().copied());
    let (y0, y1) = range(ys.iter().flatten().copied());
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );

    let (xt, xd) = ticks(x0, x1);
    for x in xt {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{x:.xd$}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
    }
    let (yt, yd) = ticks(y0, y1);
    for y in yt {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.yd$}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(&spec.x)
    );

    for (k, (name, col)) in spec.y.iter().zip(&ys).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(col)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !points.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
        }
        let ly = TOP + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + pw - 120.0,
            LEFT + pw - 100.0,
            LEFT + pw - 94.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders `spec` from `table` and writes it to `path`.
pub fn emit_plot(table: &Table, spec: &PlotSpec, path: &Path) -> Result<(), ScenarioError> {
    let svg = render_svg(table, spec)?;
    fs::write(path, svg).map_err(|e| ScenarioError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(&["t", "a", "b"]);
        for k in 0..10 {
            let x = k as f64 * 0.1;
            t.push(vec![x, x * x, 1.0 - x]);
        }
        t
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = render_svg(&table(), &PlotSpec::new("demo", "t", &["a", "b"])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">0.5<"));
        assert_eq!(svg, render_svg(&table(), &PlotSpec::new("demo", "t", &["a", "b"])).unwrap());
    }

    #[test]
    fn missing_column_is_an_error() {
        let err = render_svg(&table(), &PlotSpec::new("demo", "t", &["c"])).unwrap_err();
        assert!(matches!(err, ScenarioError::MissingColumn(ref c) if c == "c"));
    }

    #[test]
    fn empty_table_draws_axes_only() {
        let svg = render_svg(&Table::new(&["t", "a"]), &PlotSpec::new("empty", "t", &["a"])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.contains("<rect"));
    }

    #[test]
    fn ticks_use_round_steps() {
        let (t, d) = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert_eq!(d, 1);
        let (t, d) = ticks(-3.0, 250.0);
        assert_eq!(t, vec![0.0, 100.0, 200.0]);
        assert_eq!(d, 0);
    }
}
