//! Minimal SVG line charts with a logarithmic y axis.
//!
//! Each (method, policy) series is the per-cell mean over trials. Values that
//! are infinite or NaN are drawn at the top edge with an upward cap, and
//! non-positive values (no place on a log axis) at the bottom edge with a
//! downward cap; the legend says so whenever either occurs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::rows::{summarize, ResultRow, SummaryRow};
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    SolutionNorm,
    ResidualNorm,
}

impl Metric {
    pub fn label(&self) -> &'static str {
        match self {
            Metric::SolutionNorm => "mean ‖x‖₂",
            Metric::ResidualNorm => "mean ‖Ax − b‖₂",
        }
    }

    pub fn file_stem(&self) -> &'static str {
        match self {
            Metric::SolutionNorm => "solution_norm",
            Metric::ResidualNorm => "residual_norm",
        }
    }

    fn value(&self, s: &SummaryRow) -> f64 {
        match self {
            Metric::SolutionNorm => s.mean_solution_norm,
            Metric::ResidualNorm => s.mean_residual_norm,
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solution" | "solution_norm" => Ok(Metric::SolutionNorm),
            "residual" | "residual_norm" => Ok(Metric::ResidualNorm),
            _ => Err(format!("unknown metric `{s}` (expected solution, residual)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    N,
    /// Plotted on a log scale.
    Cond,
}

impl FromStr for XAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(XAxis::N),
            "cond" => Ok(XAxis::Cond),
            _ => Err(format!("unknown x axis `{s}` (expected n, cond)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub metric: Metric,
    pub x: XAxis,
    /// Keep only rows of this family.
    pub family: Option<String>,
    /// Keep only these methods.
    pub methods: Option<Vec<String>>,
    pub title: String,
}

impl PlotSpec {
    pub fn new(metric: Metric, x: XAxis) -> Self {
        Self {
            metric,
            x,
            family: None,
            methods: None,
            title: String::new(),
        }
    }

    fn describe_filter(&self) -> String {
        let mut parts = Vec::new();
        if let Some(f) = &self.family {
            parts.push(format!("family={f}"));
        }
        if let Some(m) = &self.methods {
            parts.push(format!("methods={}", m.join(",")));
        }
        if parts.is_empty() {
            "no filter".into()
        } else {
            parts.join(" ")
        }
    }
}

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 240.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Pixel mapping of the plot area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_log: bool,
    /// Decade exponents spanned by the y axis.
    pub y_lo: i32,
    pub y_hi: i32,
}

impl Axes {
    pub fn decade_px(&self) -> f64 {
        (HEIGHT - TOP - BOTTOM) / f64::from(self.y_hi - self.y_lo)
    }

    pub fn x_px(&self, x: f64) -> f64 {
        let (v, lo, hi) = if self.x_log {
            (x.log10(), self.x_lo.log10(), self.x_hi.log10())
        } else {
            (x, self.x_lo, self.x_hi)
        };
        let w = WIDTH - LEFT - RIGHT;
        if hi > lo {
            LEFT + (v - lo) / (hi - lo) * w
        } else {
            LEFT + 0.5 * w
        }
    }

    /// Finite positive values only; see [`Point`] for the clipped cases.
    pub fn y_px(&self, y: f64) -> f64 {
        TOP + (f64::from(self.y_hi) - y.log10()) * self.decade_px()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Point {
    At(f64, f64),
    ClipTop(f64),
    ClipBottom(f64),
}

struct Series {
    label: String,
    points: Vec<Point>,
}

fn x_value(spec: &PlotSpec, s: &SummaryRow) -> Option<f64> {
    match spec.x {
        XAxis::N => Some(s.n as f64),
        XAxis::Cond => s.cond.filter(|c| *c > 0.0 && c.is_finite()),
    }
}

fn build_series(rows: &[ResultRow], spec: &PlotSpec) -> Result<Vec<Series>, BenchError> {
    let selected: Vec<ResultRow> = rows
        .iter()
        .filter(|r| spec.family.as_ref().is_none_or(|f| &r.family == f))
        .filter(|r| spec.methods.as_ref().is_none_or(|m| m.contains(&r.method)))
        .cloned()
        .collect();
    if selected.is_empty() {
        return Err(BenchError::EmptySelection(spec.describe_filter()));
    }
    let mut series: Vec<Series> = Vec::new();
    for s in summarize(&selected) {
        let x = x_value(spec, &s).ok_or_else(|| {
            BenchError::Config(format!(
                "{} n={} has no usable value for the x axis",
                s.series(),
                s.n
            ))
        })?;
        let y = spec.metric.value(&s);
        let p = if !y.is_finite() {
            Point::ClipTop(x)
        } else if y <= 0.0 {
            Point::ClipBottom(x)
        } else {
            Point::At(x, y)
        };
        let label = s.series();
        match series.iter_mut().find(|e| e.label == label) {
            Some(e) => e.points.push(p),
            None => series.push(Series {
                label,
                points: vec![p],
            }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| px_x(a).total_cmp(&px_x(b)));
    }
    Ok(series)
}

fn px_x(p: &Point) -> f64 {
    match *p {
        Point::At(x, _) | Point::ClipTop(x) | Point::ClipBottom(x) => x,
    }
}

fn axes_for(series: &[Series], spec: &PlotSpec) -> Axes {
    let xs = series.iter().flat_map(|s| s.points.iter().map(px_x));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    let ys = series.iter().flat_map(|s| {
        s.points.iter().filter_map(|p| match p {
            Point::At(_, y) => Some(*y),
            _ => None,
        })
    });
    let (y_min, y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(y), hi.max(y))
    });
    let (mut y_lo, mut y_hi) = if y_min.is_finite() {
        (y_min.log10().floor() as i32, y_max.log10().ceil() as i32)
    } else {
        (0, 1)
    };
    if y_hi <= y_lo {
        y_hi = y_lo + 1;
    }
    // A little headroom keeps caps off the top data point.
    if series
        .iter()
        .any(|s| s.points.iter().any(|p| matches!(p, Point::ClipTop(_))))
    {
        y_hi += 1;
    }
    if series
        .iter()
        .any(|s| s.points.iter().any(|p| matches!(p, Point::ClipBottom(_))))
    {
        y_lo -= 1;
    }
    Axes {
        x_lo,
        x_hi,
        x_log: spec.x == XAxis::Cond,
        y_lo,
        y_hi,
    }
}

fn dash(label: &str) -> &'static str {
    match label.rsplit('/').next() {
        Some("linesearch") => "8 4",
        Some("twodim") => "2 3",
        Some("direct") => "10 3 2 3",
        _ => "none",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt_x(x: f64, log: bool) -> String {
    if log {
        format!("1e{}", x.log10().round() as i32)
    } else if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.3}")
    }
}

fn x_ticks(axes: &Axes, series: &[Series]) -> Vec<f64> {
    let distinct: BTreeSet<u64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| px_x(p).to_bits()))
        .collect();
    let values: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
    let mut values = values;
    values.sort_by(f64::total_cmp);
    if values.len() <= 12 {
        return values;
    }
    if axes.x_log {
        let (lo, hi) = (axes.x_lo.log10().ceil() as i32, axes.x_hi.log10().floor() as i32);
        return (lo..=hi).map(|e| 10f64.powi(e)).collect();
    }
    (0..=6)
        .map(|k| (axes.x_lo + (axes.x_hi - axes.x_lo) * f64::from(k) / 6.0).round())
        .collect()
}

pub fn emit_plot(rows: &[ResultRow], spec: &PlotSpec) -> Result<String, BenchError> {
    let series = build_series(rows, spec)?;
    let axes = axes_for(&series, spec);
    let plot_bottom = HEIGHT - BOTTOM;
    let plot_right = WIDTH - RIGHT;
    let mut svg = String::new();
    let w = &mut svg;
    // Writing into a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let title = if spec.title.is_empty() {
        spec.metric.label().to_string()
    } else {
        spec.title.clone()
    };
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + plot_right) / 2.0,
        escape(&title)
    );

    // Grid and y ticks, one per decade.
    for e in axes.y_lo..=axes.y_hi {
        let y = axes.y_px(10f64.powi(e));
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{plot_right}" y2="{y:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for x in x_ticks(&axes, &series) {
        let px = axes.x_px(x);
        let _ = writeln!(
            w,
            r##"<line x1="{px:.2}" y1="{plot_bottom}" x2="{px:.2}" y2="{:.2}" stroke="#333333"/>"##,
            plot_bottom + 5.0
        );
        let _ = writeln!(
            w,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            plot_bottom + 19.0,
            fmt_x(x, axes.x_log)
        );
    }
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        plot_right - LEFT,
        plot_bottom - TOP
    );
    let x_label = match spec.x {
        XAxis::N => "n",
        XAxis::Cond => "condition number",
    };
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        (LEFT + plot_right) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        (TOP + plot_bottom) / 2.0,
        (TOP + plot_bottom) / 2.0,
        spec.metric.label()
    );

    let mut clipped_top = false;
    let mut clipped_bottom = false;
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|p| match *p {
                Point::At(x, y) => (axes.x_px(x), axes.y_px(y)),
                Point::ClipTop(x) => (axes.x_px(x), TOP),
                Point::ClipBottom(x) => (axes.x_px(x), plot_bottom),
            })
            .collect();
        if coords.len() > 1 {
            let pts: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                w,
                r#"<polyline class="series" data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{}"/>"#,
                escape(&s.label),
                pts.join(" "),
                dash(&s.label)
            );
        } else if let Some(&(x, y)) = coords.first() {
            let _ = writeln!(
                w,
                r#"<circle class="marker" data-series="{}" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#,
                escape(&s.label)
            );
        }
        for (p, &(x, y)) in s.points.iter().zip(&coords) {
            match p {
                Point::ClipTop(_) => {
                    clipped_top = true;
                    let _ = writeln!(
                        w,
                        r#"<path class="cap-top" d="M{:.2},{:.2} L{x:.2},{:.2} L{:.2},{:.2} Z" fill="{color}"/>"#,
                        x - 5.0,
                        y + 2.0,
                        y - 7.0,
                        x + 5.0,
                        y + 2.0
                    );
                }
                Point::ClipBottom(_) => {
                    clipped_bottom = true;
                    let _ = writeln!(
                        w,
                        r#"<path class="cap-bottom" d="M{:.2},{:.2} L{x:.2},{:.2} L{:.2},{:.2} Z" fill="{color}"/>"#,
                        x - 5.0,
                        y - 2.0,
                        y + 7.0,
                        x + 5.0,
                        y - 2.0
                    );
                }
                Point::At(..) => {}
            }
        }
    }

    // Legend.
    let lx = plot_right + 16.0;
    let mut ly = TOP + 6.0;
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2" stroke-dasharray="{}"/>"#,
            lx + 28.0,
            dash(&s.label)
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 34.0,
            ly + 4.0,
            escape(&s.label)
        );
        ly += 18.0;
    }
    if clipped_top {
        ly += 6.0;
        let _ = writeln!(
            w,
            r#"<text class="legend-note" x="{lx:.2}" y="{ly:.2}">▲ at top: inf/nan, clipped</text>"#
        );
        ly += 18.0;
    }
    if clipped_bottom {
        ly += 6.0;
        let _ = writeln!(
            w,
            r#"<text class="legend-note" x="{lx:.2}" y="{ly:.2}">▼ at bottom: zero, clipped</text>"#
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, method: &str, residual: f64) -> ResultRow {
        ResultRow {
            family: "hilbert".into(),
            n,
            cond: None,
            method: method.into(),
            policy: "classic".into(),
            seed: 1,
            solution_norm: 1.0,
            residual_norm: residual,
            iterations: 1,
            termination: "converged".into(),
            elapsed_s: 0.0,
            fallbacks: 0,
        }
    }

    fn polyline_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end]
                    .split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn two_decades_apart() {
        let rows = [row(1, "cg", 1.0), row(10, "cg", 100.0)];
        let spec = PlotSpec::new(Metric::ResidualNorm, XAxis::N);
        let svg = emit_plot(&rows, &spec).unwrap();
        let lines = polyline_points(&svg);
        assert_eq!(lines.len(), 1);
        let pts = &lines[0];
        let series = build_series(&rows, &spec).unwrap();
        let axes = axes_for(&series, &spec);
        assert_eq!((axes.y_lo, axes.y_hi), (0, 2));
        let rise = pts[0].1 - pts[1].1;
        assert!((rise - 2.0 * axes.decade_px()).abs() < 0.011, "rise {rise}");
        assert!(pts[1].0 > pts[0].0);
    }

    #[test]
    fn single_point_is_a_marker() {
        let svg = emit_plot(
            &[row(5, "cg", 1e-3)],
            &PlotSpec::new(Metric::ResidualNorm, XAxis::N),
        )
        .unwrap();
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains(r#"class="marker""#));
    }

    #[test]
    fn infinite_values_are_capped() {
        let rows = [row(1, "cgs", 1.0), row(2, "cgs", f64::INFINITY), row(3, "cgs", 10.0)];
        let svg = emit_plot(&rows, &PlotSpec::new(Metric::ResidualNorm, XAxis::N)).unwrap();
        assert!(svg.contains("cap-top"));
        assert!(svg.contains("inf/nan, clipped"));
        let pts = &polyline_points(&svg)[0];
        assert_eq!(pts[1].1, TOP);
        let finite = emit_plot(&rows[..1], &PlotSpec::new(Metric::ResidualNorm, XAxis::N)).unwrap();
        assert!(!finite.contains("clipped"));
    }

    #[test]
    fn one_series_per_method_policy() {
        let rows = [
            row(1, "cg", 1.0),
            row(2, "cg", 2.0),
            row(1, "gmres", 1.0),
            row(2, "gmres", 3.0),
        ];
        let svg = emit_plot(&rows, &PlotSpec::new(Metric::ResidualNorm, XAxis::N)).unwrap();
        assert_eq!(polyline_points(&svg).len(), 2);
        assert!(svg.contains(">cg/classic<") && svg.contains(">gmres/classic<"));
    }

    #[test]
    fn empty_selection_names_the_filter() {
        let spec = PlotSpec {
            family: Some("random".into()),
            ..PlotSpec::new(Metric::SolutionNorm, XAxis::N)
        };
        let err = emit_plot(&[row(1, "cg", 1.0)], &spec).unwrap_err();
        assert!(err.to_string().contains("family=random"), "{err}");
    }

    #[test]
    fn cond_axis_needs_cond_values() {
        let spec = PlotSpec::new(Metric::SolutionNorm, XAxis::Cond);
        assert!(emit_plot(&[row(1, "cg", 1.0)], &spec).is_err());
    }
}
