//! Minimal hand-written SVG line charts. Output depends only on the inputs,
//! so identical data gives identical bytes.

use std::fmt::Write;

use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    lo: f64,
    hi: f64,
    points: usize,
}

impl Frame {
    fn new<'a>(values: impl Iterator<Item = &'a f64>, points: usize) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        } else if hi == lo {
            (lo, hi) = (lo - 0.5 * lo.abs().max(1e-12), hi + 0.5 * hi.abs().max(1e-12));
        }
        Self { lo, hi, points }
    }

    fn x(&self, i: usize) -> f64 {
        if self.points <= 1 {
            return WIDTH / 2.0;
        }
        MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (self.points - 1) as f64
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - self.lo) / (self.hi - self.lo)
    }
}

fn open(out: &mut String, title: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (v, y) in [(frame.hi, y0), (frame.lo, y1)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3e}</text>"#, x0 - 4.0);
    }
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str) {
    out.push_str(r#"<polyline fill="none" stroke-width="1.5" stroke=""#);
    out.push_str(color);
    out.push_str(r#"" points=""#);
    for (k, (x, y)) in points.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out.push_str("\"/>\n");
}

fn legend(out: &mut String, k: usize, name: &str, color: &str) {
    let y = MARGIN + 14.0 * k as f64;
    let x = WIDTH - MARGIN + 6.0;
    let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="10" height="3" fill="{color}"/>"#, y - 4.0);
    let _ = writeln!(out, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10">{}</text>"#, x + 13.0, escape(name));
}

/// Actual against predicted values: exactly two polylines.
pub fn forecast_svg(title: &str, actual: &[f64], predicted: &[f64]) -> Result<String> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::invalid(format!("cannot plot {} actual against {} predicted values", actual.len(), predicted.len())));
    }
    let frame = Frame::new(actual.iter().chain(predicted), actual.len());
    let mut out = String::new();
    open(&mut out, title, &frame);
    for (k, (name, values)) in [("actual", actual), ("predicted", predicted)].into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, v)| (frame.x(i), frame.y(*v))).collect();
        polyline(&mut out, &pts, PALETTE[k]);
        legend(&mut out, k, name, PALETTE[k]);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One polyline per named series across the labelled horizons; missing
/// cells are skipped.
pub fn trend_svg(title: &str, labels: &[String], series: &[(String, Vec<Option<f64>>)]) -> Result<String> {
    if labels.is_empty() || series.is_empty() {
        return Err(Error::invalid("nothing to plot"));
    }
    let frame = Frame::new(series.iter().flat_map(|(_, v)| v.iter().flatten()), labels.len());
    let mut out = String::new();
    open(&mut out, title, &frame);
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            frame.x(i),
            HEIGHT - MARGIN + 14.0,
            escape(label)
        );
    }
    for (k, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.filter(|v| v.is_finite()).map(|v| (frame.x(i), frame.y(v))))
            .collect();
        polyline(&mut out, &pts, color);
        legend(&mut out, k, name, color);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_polylines() {
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let p: Vec<f64> = (0..10).map(|i| i as f64 + 0.5).collect();
        let svg = forecast_svg("har h=1", &a, &p).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg, forecast_svg("har h=1", &a, &p).unwrap());
        assert!(forecast_svg("x", &[], &[]).is_err());
    }

    #[test]
    fn one_series_per_model() {
        let labels: Vec<String> = ["1d", "2d", "3d", "4d", "5d", "6d", "1w", "2w", "1m", "2m", "3m"].map(String::from).to_vec();
        let series: Vec<(String, Vec<Option<f64>>)> =
            (0..5).map(|m| (format!("m{m}"), (0..11).map(|h| Some((m * h) as f64)).collect())).collect();
        let svg = trend_svg("mse", &labels, &series).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
    }

    #[test]
    fn flat_series_stays_inside() {
        let svg = forecast_svg("flat", &[2.0; 3], &[2.0; 3]).unwrap();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
