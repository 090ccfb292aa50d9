//! Log-log scatter plots as plain SVG text.

use std::fmt::Write;

use radon_core::knapp::log_log_fit;

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub svg: String,
    /// Points dropped for a nonpositive coordinate.
    pub dropped: usize,
    /// Fitted slope per series, when it has two usable points.
    pub slopes: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Scatter of each series in log2 coordinates, with least-squares lines and
/// slope annotations when `fit` is set.
pub fn plot_loglog(series: &[Series], fit: bool) -> Plot {
    let mut dropped = 0;
    let mut warnings = Vec::new();
    let clean: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            let kept: Vec<(f64, f64)> =
                s.points.iter().copied().filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()).collect();
            dropped += s.points.len() - kept.len();
            kept
        })
        .collect();
    if dropped > 0 {
        warnings.push(format!("{dropped} nonpositive points dropped"));
    }
    let all: Vec<(f64, f64)> = clean.iter().flatten().map(|(x, y)| (x.log2(), y.log2())).collect();

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );

    let mut slopes = vec![None; series.len()];
    if all.is_empty() {
        warnings.push("empty plot: no positive data".into());
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">no data</text>"#, W / 2.0, H / 2.0);
        svg.push_str("</svg>\n");
        return Plot { svg, dropped, slopes, warnings };
    }

    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    let pad = |a: f64, b: f64| if b - a < 1e-9 { (a - 0.5, b + 0.5) } else { (a - 0.05 * (b - a), b + 0.05 * (b - a)) };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    // ticks at integer powers of two
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">2^{k}</text>"#,
            px(k as f64),
            H - MARGIN + 16.0
        );
    }
    let ystep = ((y1 - y0) / 10.0).ceil().max(1.0) as i64;
    let mut k = y0.ceil() as i64;
    while k as f64 <= y1 {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">2^{k}</text>"#,
            MARGIN - 6.0,
            py(k as f64) + 3.0
        );
        k += ystep;
    }

    for (idx, (s, pts)) in series.iter().zip(&clean).enumerate() {
        let color = COLORS[idx % COLORS.len()];
        for (x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(x.log2()),
                py(y.log2())
            );
        }
        let mut label = s.label.clone();
        if fit && pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(f) = log_log_fit(&xs, &ys) {
                slopes[idx] = Some(f.slope);
                let (a, b) = (xs.iter().cloned().fold(f64::INFINITY, f64::min).log2(), xs.iter().cloned().fold(0.0, f64::max).log2());
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    px(a),
                    py(f.intercept + f.slope * a),
                    px(b),
                    py(f.intercept + f.slope * b)
                );
                label = format!("{label}: slope {:.3}", f.slope);
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 16.0 * idx as f64,
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    Plot { svg, dropped, slopes, warnings }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
