use std::fmt::Write as _;
use std::path::Path;

use super::sweep::{correlate_sweep, SweepField, SweepRecord};
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = 0.5f64.max(lo.abs() * 0.1);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of two record columns as a standalone SVG document.
///
/// One circle per record with finite coordinates. The title carries the
/// Pearson coefficient over non-diverged records, printed to 12 decimals.
pub fn render_scatter_svg(records: &[SweepRecord], x: SweepField, y: SweepField) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("scatter plot needs at least one record".into()));
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (x.value(r), y.value(r)))
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .collect();
    let (x_lo, x_hi) = span(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = span(points.iter().map(|p| p.1));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let r_text = match correlate_sweep(records, x, y) {
        Ok(rep) => format!("{:.12}", rep.pearson),
        Err(_) => "n/a".to_string(),
    };

    let mut svg = String::new();
    let w = &mut svg;
    // write! into a String cannot fail
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{}" y="32" text-anchor="middle" font-family="sans-serif" font-size="18">{} vs {} (Pearson r = {r_text})</text>"#,
        WIDTH / 2.0,
        escape(y.name()),
        escape(x.name())
    );
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..TICKS {
        let t = i as f64 / (TICKS - 1) as f64;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = y_lo + t * (y_hi - y_lo);
        let px = sx(xv);
        let py = sy(yv);
        let base = TOP + plot_h;
        let _ = writeln!(w, r#"<line x1="{px:.2}" y1="{base}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, base + 6.0);
        let _ = writeln!(
            w,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{xv:.4}</text>"#,
            base + 22.0
        );
        let _ = writeln!(w, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 6.0);
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{yv:.4}</text>"#,
            LEFT - 10.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(x.name())
    );
    let _ = writeln!(
        w,
        r#"<text x="24" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 24 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y.name())
    );
    let _ = writeln!(w, r#"<g fill="steelblue" fill-opacity="0.7" stroke="navy" stroke-width="0.5">"#);
    for (a, b) in &points {
        let _ = writeln!(w, r#"<circle cx="{:.3}" cy="{:.3}" r="4"/>"#, sx(*a), sy(*b));
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

pub fn emit_scatter_svg(records: &[SweepRecord], x: SweepField, y: SweepField, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_scatter_svg(records, x, y)?;
    std::fs::write(path, svg)?;
    Ok(())
}
