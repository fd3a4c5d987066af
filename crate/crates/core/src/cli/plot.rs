//! Minimal static SVG line plots. Output depends only on the input data.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            xs,
            ys,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Plain polylines.
    Profiles,
    /// The first two series bound a shaded band; all are drawn as lines.
    Envelope,
    /// Piecewise-constant steps, e.g. equilibrium counts against λ.
    Bifurcation,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn bounds(series: &[Series]) -> Frame {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for s in series {
        for (&x, &y) in s.xs.iter().zip(&s.ys) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
    }
}

fn points(f: &Frame, xs: &[f64], ys: &[f64], steps: bool) -> String {
    let mut out = String::new();
    let mut prev: Option<f64> = None;
    for (&x, &y) in xs.iter().zip(ys) {
        if let (true, Some(py)) = (steps, prev) {
            let _ = write!(out, "{:.2},{:.2} ", f.px(x), f.py(py));
        }
        let _ = write!(out, "{:.2},{:.2} ", f.px(x), f.py(y));
        prev = Some(y);
    }
    out.trim_end().to_string()
}

/// The SVG document as a string.
pub fn render_svg(series: &[Series], kind: PlotKind) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.xs.is_empty()) {
        return Err(Error::invalid("nothing to plot"));
    }
    if series.iter().any(|s| s.xs.len() != s.ys.len()) {
        return Err(Error::invalid("series has mismatched x and y lengths"));
    }
    if series
        .iter()
        .any(|s| s.xs.iter().chain(&s.ys).any(|v| !v.is_finite()))
    {
        return Err(Error::invalid("series contains non-finite values"));
    }
    if kind == PlotKind::Envelope && series.len() < 2 {
        return Err(Error::invalid(
            "an envelope plot needs lower and upper series",
        ));
    }
    let f = bounds(series);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    if f.y0 < 0.0 && f.y1 > 0.0 {
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 4"/>"##,
            W - MARGIN,
            y = f.py(0.0)
        );
    }
    for (x, anchor, v) in [(MARGIN, "start", f.x0), (W - MARGIN, "end", f.x1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="{anchor}">{v:.3}</text>"#,
            H - MARGIN + 16.0
        );
    }
    for (y, v) in [(H - MARGIN, f.y0), (MARGIN, f.y1)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 4.0
        );
    }

    if kind == PlotKind::Envelope {
        let (lo, hi) = (&series[0], &series[1]);
        let mut band = points(&f, &hi.xs, &hi.ys, false);
        let rev_x: Vec<f64> = lo.xs.iter().rev().copied().collect();
        let rev_y: Vec<f64> = lo.ys.iter().rev().copied().collect();
        band.push(' ');
        band.push_str(&points(&f, &rev_x, &rev_y, false));
        let _ = writeln!(
            svg,
            r##"<polygon points="{band}" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts = points(&f, &s.xs, &s.ys, kind == PlotKind::Bifurcation);
        let _ = writeln!(
            svg,
            r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 * (i + 1) as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn emit_plot(series: &[Series], kind: PlotKind, path: &Path) -> Result<()> {
    let svg = render_svg(series, kind)?;
    std::fs::write(path, svg)?;
    Ok(())
}
