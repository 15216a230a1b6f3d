//! Standalone SVG charts drawn from the same numbers that go into the CSV files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn tr(v: f64, log: bool) -> f64 {
    if log {
        if v > 0.0 {
            v.log10()
        } else {
            f64::NAN
        }
    } else {
        v
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str, logx: bool, logy: bool) {
    let _ = writeln!(s, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M);
    let fmt = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let _ = writeln!(s, r#"<text x="{M}" y="{}" text-anchor="start">{}</text>"#, H - M + 16.0, fmt(x.0, logx));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, W - M, H - M + 16.0, fmt(x.1, logx));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, M - 4.0, H - M, fmt(y.0, logy));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, M - 4.0, M + 10.0, fmt(y.1, logy));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(xlabel));
    let _ = writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#, H / 2.0, H / 2.0, escape(ylabel));
}

/// Line chart; `logx`/`logy` switch the axes to base-10 logarithms.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], logx: bool, logy: bool) -> String {
    let xr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| tr(p.0, logx))));
    let yr = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| tr(p.1, logy))));
    let mut s = header(title);
    axes(&mut s, xr, yr, xlabel, ylabel, logx, logy);
    let px = |v: f64| M + (v - xr.0) / (xr.1 - xr.0) * (W - 2.0 * M);
    let py = |v: f64| H - M - (v - yr.0) / (yr.1 - yr.0) * (H - 2.0 * M);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for &(x, y) in &ser.points {
            let (x, y) = (tr(x, logx), tr(y, logy));
            if !(x.is_finite() && y.is_finite()) {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, px(x), py(y));
            pen_up = false;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, W - M - 150.0, M + 16.0 + 14.0 * i as f64, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of `log10 v` on a regular `(x, y)` lattice.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, cells: &[(f64, f64, f64)]) -> String {
    let xr = bounds(cells.iter().map(|c| c.0));
    let yr = bounds(cells.iter().map(|c| c.1));
    let logs: Vec<f64> = cells.iter().map(|c| if c.2 > 0.0 { c.2.log10() } else { f64::NAN }).collect();
    let vr = bounds(logs.iter().copied());
    let mut xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
    }
    let cw = (W - 2.0 * M) / xs.len().max(1) as f64;
    let ch = (H - 2.0 * M) / ys.len().max(1) as f64;
    let mut s = header(title);
    for (c, &lv) in cells.iter().zip(&logs) {
        let t = if lv.is_finite() { (lv - vr.0) / (vr.1 - vr.0) } else { 0.0 };
        let (r, g, b) = ((255.0 * t) as u8, (80.0 + 100.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8, (255.0 * (1.0 - t)) as u8);
        let x = M + (c.0 - xr.0) / (xr.1 - xr.0).max(1e-300) * (W - 2.0 * M - cw);
        let y = H - M - ch - (c.1 - yr.0) / (yr.1 - yr.0).max(1e-300) * (H - 2.0 * M - ch);
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#, cw + 0.5, ch + 0.5);
    }
    axes(&mut s, xr, yr, xlabel, ylabel, false, false);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">log10 range [{:.1}, {:.1}]</text>"#, W - M, M - 6.0, vr.0, vr.1);
    s.push_str("</svg>\n");
    s
}
