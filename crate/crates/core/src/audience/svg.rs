//! Minimal SVG charts for the audience outputs. No external renderer.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const ROW_H: f64 = 22.0;
const LABEL_W: f64 = 240.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal bars, one per `(label, value)`; negative values extend left
/// of the zero line.
pub fn bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let height = 40.0 + ROW_H * bars.len() as f64 + 10.0;
    let lo = bars.iter().map(|b| b.1).fold(0.0, f64::min);
    let hi = bars.iter().map(|b| b.1).fold(0.0, f64::max);
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let plot_w = WIDTH - LABEL_W - 70.0;
    let x = |v: f64| LABEL_W + (v - lo) / span * plot_w;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, (label, v)) in bars.iter().enumerate() {
        let y = 36.0 + ROW_H * i as f64;
        let (x0, x1) = if *v >= 0.0 { (x(0.0), x(*v)) } else { (x(*v), x(0.0)) };
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LABEL_W - 6.0, y + 14.0, escape(label));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            (x1 - x0).max(0.5),
            ROW_H - 6.0,
            PALETTE[0]
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{v:.3}</text>"#, x1.max(x0) + 4.0, y + 14.0);
    }
    let _ = writeln!(
        out,
        r#"<line x1="{0:.1}" y1="30" x2="{0:.1}" y2="{1:.1}" stroke="black"/>"#,
        x(0.0),
        height - 8.0
    );
    out.push_str("</svg>\n");
    out
}

/// One polyline per series over a shared integer x axis.
pub fn line_chart(title: &str, series: &[(String, Vec<(u32, f64)>)]) -> String {
    let (w, h) = (WIDTH, 360.0);
    let (left, right, top, bottom) = (50.0, 170.0, 36.0, 30.0);
    let points = series.iter().flat_map(|s| s.1.iter());
    let (mut x_max, mut y_lo, mut y_hi) = (1u32, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_max = x_max.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    } else if y_hi - y_lo <= 0.0 {
        (y_lo, y_hi) = (y_lo - 0.5, y_hi + 0.5);
    }
    let px = |x: u32| left + x as f64 / x_max as f64 * (w - left - right);
    let py = |y: f64| top + (y_hi - y) / (y_hi - y_lo) * (h - top - bottom);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
        w - left - right,
        h - top - bottom
    );
    let _ = writeln!(out, r#"<text x="{left}" y="{:.1}">0</text>"#, h - 10.0);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{x_max}</text>"#, w - right, h - 10.0);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{y_hi:.2}</text>"#, top + 10.0);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}">{y_lo:.2}</text>"#, h - bottom);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let ly = top + 16.0 * i as f64 + 8.0;
        let lx = w - right + 12.0;
        let _ = writeln!(out, r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/>"#, ly - 9.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 14.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_escape_labels() {
        let svg = bar_chart("Gap <z>", &[("Cronaca & nera".into(), 0.8), ("Music".into(), -0.2)]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("Cronaca &amp; nera"));
        assert!(svg.contains("Gap &lt;z&gt;"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }

    #[test]
    fn lines_one_polyline_per_series() {
        let svg = line_chart("AMR", &[("young".into(), vec![(0, 1.0), (1, 2.0)]), ("seniors".into(), vec![(0, 3.0)])]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        let flat = line_chart("flat", &[("a".into(), vec![(0, 1.0), (1, 1.0)])]);
        assert!(!flat.contains("NaN"));
    }
}
