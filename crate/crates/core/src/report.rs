//! CSV and SVG emission helpers shared by the reporting paths. Headers
//! and column orders are fixed by the callers; byte-stable formatting
//! here is what makes cross-thread-count runs comparable.

use num_complex::Complex64;
use std::path::Path;

/// Canonical complex rendering: `a+bi` / `a-bi`, pure reals as `a`.
pub fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        fmt_f64(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", fmt_f64(z.re), fmt_f64(-z.im))
    } else {
        format!("{}+{}i", fmt_f64(z.re), fmt_f64(z.im))
    }
}

/// Shortest round-trippable float rendering (Rust's default Display for
/// f64 is already shortest-exact).
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// CSV table with a fixed header; every row must have the header's arity.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        assert_eq!(row.len(), header.len(), "csv row arity mismatch");
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, content: &str) -> crate::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Minimal standalone SVG: one polyline per series over a shared data
/// range, auto-scaled to the viewport with 5% margins.
pub fn svg_polylines(series: &[(&str, &[(f64, f64)])], width: u32, height: u32) -> String {
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let all = series.iter().flat_map(|(_, pts)| pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let w = width as f64;
    let h = height as f64;
    let sx = |x: f64| 0.05 * w + 0.9 * w * (x - x0) / (x1 - x0);
    let sy = |y: f64| h - (0.05 * h + 0.9 * h * (y - y0) / (y1 - y0));
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"><title>{}</title></polyline>\n",
            COLORS[i % COLORS.len()],
            path.join(" "),
            name
        ));
    }
    out.push_str("</svg>\n");
    out
}
