//! Minimal static SVG line charts of sweep results.

use std::fmt::Write;

use crate::sweep::SweepResult;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 3] = ["", "6,3", "2,3"];

type Measure = fn(&crate::CorrelationReport) -> f64;

struct Series {
    label: String,
    color: &'static str,
    dash: &'static str,
    /// Contiguous stable stretches.
    segments: Vec<Vec<(f64, f64)>>,
}

/// `E_N`, `G_fwd` and `G_bwd` against axis1, one line per pair and axis2
/// value. Unstable points break the line.
pub fn render_svg(result: &SweepResult, title: &str) -> String {
    let mut series = Vec::new();
    let axis2_values = result.axis2_values();
    let measures: [(&str, Measure); 3] = [
        ("E_N", |r| r.e_n),
        ("G_fwd", |r| r.g_fwd),
        ("G_bwd", |r| r.g_bwd),
    ];
    for (ci, (&pair, y2)) in result
        .pairs
        .iter()
        .flat_map(|p| axis2_values.iter().map(move |y| (p, *y)))
        .enumerate()
    {
        for (mi, (name, get)) in measures.iter().enumerate() {
            let mut segments = vec![Vec::new()];
            for row in result.series(y2) {
                match row.report(pair) {
                    Some(rep) => segments.last_mut().unwrap().push((row.axis1, get(rep))),
                    None => segments.push(Vec::new()),
                }
            }
            segments.retain(|s| !s.is_empty());
            let mut label = format!("{name} ({pair})");
            if let (Some(a2), Some(y)) = (result.axis2, y2) {
                let _ = write!(label, " {a2}={y}");
            }
            series.push(Series {
                label,
                color: COLORS[ci % COLORS.len()],
                dash: DASHES[mi],
                segments,
            });
        }
    }

    let points = || series.iter().flat_map(|s| s.segments.iter().flatten());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in points() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    for r in &result.rows {
        x0 = x0.min(r.axis1);
        x1 = x1.max(r.axis1);
    }
    if x1.partial_cmp(&x0) != Some(std::cmp::Ordering::Greater) {
        x1 = x0 + 1.0;
    }
    let y0 = 0.0;
    if y1.partial_cmp(&y0) != Some(std::cmp::Ordering::Greater) {
        y1 = 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-size="13">{}</text>"#,
        LEFT,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            TOP + plot_h + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        result.axis1
    );
    for (i, s) in series.iter().enumerate() {
        for seg in &s.segments {
            let pts: Vec<String> = seg
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="{}" points="{}"/>"#,
                s.color,
                s.dash,
                pts.join(" ")
            );
        }
        let ly = TOP + 12.0 + 14.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.5" stroke-dasharray="{}"/>"#,
            lx + 22.0,
            s.color,
            s.dash
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_sweep, Axis, SweepParam, SweepSpec};
    use crate::{ModePair, SystemParams};

    #[test]
    fn svg_has_one_polyline_per_stable_segment() {
        let spec = SweepSpec {
            base: SystemParams::new(1.0, 1.0, 1.0, 0.0, 0.3, 0.0, 0.0),
            axis1: Axis::new(SweepParam::Lambda, vec![0.2, 0.5, 1.5, 2.0]),
            axis2: None,
            pairs: vec![ModePair::AB],
        };
        let svg = render_svg(&run_sweep(&spec, 1).unwrap(), "t<1>");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("t&lt;1&gt;"));
        assert!(svg.contains("E_N (ab)"));
    }
}
