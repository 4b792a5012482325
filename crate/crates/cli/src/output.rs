//! CSV, JSON and SVG artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Writes a header row and data rows; strings are written verbatim.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Rows of a CSV with a header, as (header, rows of fields).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Missing(format!("{} is empty", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines.map(|l| l.split(',').map(|s| s.trim().to_string()).collect()).collect();
    Ok((header, rows))
}

pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

/// A polyline chart. Uses log axes when `log` is set and every value is positive.
pub fn write_svg(path: &Path, title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)], log: bool) -> Result<(), CliError> {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    let log = log && !pts.is_empty() && pts.iter().all(|p| p.0 > 0.0 && p.1 > 0.0);
    let tf = |v: f64| if log { v.log10() } else { v };
    let range = |vals: Vec<f64>| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(pts.iter().map(|p| tf(p.0)).collect());
    let (y0, y1) = range(pts.iter().map(|p| tf(p.1)).collect());
    let sx = |x: f64| m + (tf(x) - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (tf(y) - y0) / (y1 - y0) * (h - 2.0 * m);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<path d="M{m},{m} V{} H{}" fill="none" stroke="black"/>"#, h - m, w - m);
    let axis = |v: f64| if log { format!("1e{v:.2}") } else { format!("{v:.3e}") };
    let _ = writeln!(s, r#"<text x="{m}" y="{}">{}</text>"#, h - m + 16.0, axis(x0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, w - m, h - m + 16.0, axis(x1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, m - 4.0, h - m, axis(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, m - 4.0, m + 4.0, axis(y1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 15.0, escape(xlabel));
    let _ = writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{}</text>"#, h / 2.0, h / 2.0, escape(ylabel));
    for (k, (name, data)) in series.iter().enumerate() {
        let c = colors[k % colors.len()];
        let coords: Vec<String> = data.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, coords.join(" "));
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, w - m - 120.0, m + 16.0 * (k as f64 + 1.0), escape(name));
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(())
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
