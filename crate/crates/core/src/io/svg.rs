//! Scatter plot of noiseless intensity against variance.

use std::fmt::Write as _;
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::mc::LinearFit;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
/// Larger scatters are thinned to this many points, evenly by index.
const MAX_POINTS: usize = 5000;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// SVG 1.1 document with axes, the points, the fitted line (if any) and a
/// slope annotation.
pub fn scatter_svg(points: &[(f64, f64)], fit: Option<&LinearFit>, title: &str) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InsufficientData("scatter plot needs at least one point".into()));
    }
    let max_x = points.iter().fold(0.0f64, |m, p| m.max(p.0));
    let max_y = points.iter().fold(0.0f64, |m, p| m.max(p.1));
    let max_x = if max_x > 0.0 { max_x * 1.05 } else { 1.0 };
    let max_y = if max_y > 0.0 { max_y * 1.05 } else { 1.0 };
    let px = |x: f64| MARGIN + x / max_x * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / max_y * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (px(0.0), py(0.0), px(max_x), py(max_y));
    let _ = writeln!(
        s,
        r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="black" fill="none"/>"#,
        fmt(x0), fmt(y0), fmt(x1), fmt(y0), fmt(x0), fmt(y0), fmt(x0), fmt(y1)
    );
    for i in 0..=4 {
        let fx = max_x * i as f64 / 4.0;
        let fy = max_y * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{:.3}</text>"#,
            fmt(px(fx)), fmt(y0 + 16.0), fx
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#,
            fmt(x0 - 6.0), fmt(py(fy) + 4.0), fy
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">noiseless intensity</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">variance</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let step = points.len().div_ceil(MAX_POINTS);
    let _ = writeln!(s, r#"<g fill="steelblue" fill-opacity="0.5">"#);
    for &(x, y) in points.iter().step_by(step) {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="1.5"/>"#, fmt(px(x)), fmt(py(y)));
    }
    let _ = writeln!(s, "</g>");
    if let Some(f) = fit {
        let (ya, yb) = (f.intercept, f.intercept + f.slope * max_x);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="crimson" stroke-width="1.5"/>"#,
            fmt(px(0.0)), fmt(py(ya)), fmt(px(max_x)), fmt(py(yb))
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" fill="crimson">slope = {:.6}, intercept = {:.6}, R² = {:.4}</text>"#,
            fmt(MARGIN + 10.0),
            fmt(MARGIN),
            f.slope,
            f.intercept,
            f.r_squared
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_scatter_svg(points: &[(f64, f64)], fit: Option<&LinearFit>, title: &str, path: &Path) -> Result<()> {
    atomic_write(path, scatter_svg(points, fit, title)?.as_bytes())
}
