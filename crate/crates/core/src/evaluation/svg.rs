//! Bland-Altman scatter plots as standalone SVG documents.

use std::fmt::Write;

use super::{AgreementLimits, BlandAltman};
use crate::{Nutrient, Scalar};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

pub const MEAN_LINE_COLOR: &str = "red";
pub const LIMIT_LINE_COLOR: &str = "green";
pub const LIMIT_DASHARRAY: &str = "2,4";

/// Plot file name for a nutrient: `bland_altman_<key>.svg`.
pub fn plot_file_name(nutrient: Nutrient) -> String {
    format!("bland_altman_{}.svg", nutrient.key())
}

pub fn render_bland_altman_svg<T: Scalar>(summary: &BlandAltman<T>, nutrient: Nutrient) -> String {
    render_agreement_svg(summary.get(nutrient), nutrient)
}

/// Scatter of `(average, difference)` with a solid red mean-difference line
/// and dotted green limits of agreement. Points are `<circle>` elements and
/// the three reference lines are the only `<line>` elements; axes and ticks
/// are drawn as paths. Output depends only on the input.
pub fn render_agreement_svg<T: Scalar>(limits: &AgreementLimits<T>, nutrient: Nutrient) -> String {
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let points: Vec<(f64, f64)> = limits.points.iter().map(|&(a, d)| (f(a), f(d))).collect();
    let (mean, low, high) = (f(limits.mean_diff), f(limits.loa_low), f(limits.loa_high));

    let (x_min, x_max) = padded_range(points.iter().map(|p| p.0));
    let (y_min, y_max) = padded_range(points.iter().map(|p| p.1).chain([mean, low, high]));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + (y_max - y) / (y_max - y_min) * plot_h;
    let unit = nutrient.unit();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="15">Bland-Altman: {} ({unit}), n = {}</text>"#,
        LEFT + plot_w / 2.0,
        nutrient.label(),
        points.len()
    );

    // axes frame and ticks
    let _ = writeln!(
        svg,
        r#"<path class="axis" d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
        LEFT,
        TOP,
        TOP + plot_h,
        LEFT + plot_w
    );
    let mut tick_path = String::new();
    for x in nice_ticks(x_min, x_max) {
        let px = sx(x);
        let _ = write!(tick_path, "M{px:.2},{:.2} v5 ", TOP + plot_h);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            tick_label(x)
        );
    }
    for y in nice_ticks(y_min, y_max) {
        let py = sy(y);
        let _ = write!(tick_path, "M{LEFT:.2},{py:.2} h-5 ");
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(svg, r#"<path class="ticks" d="{}" stroke="black" stroke-width="1"/>"#, tick_path.trim_end());
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Mean of prediction and ground truth ({unit})</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Prediction minus ground truth ({unit})</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let _ = writeln!(svg, r##"<g class="points" fill="#1f77b4" fill-opacity="0.55">"##);
    for &(a, d) in &points {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, sx(a), sy(d));
    }
    let _ = writeln!(svg, "</g>");

    let x0 = LEFT;
    let x1 = LEFT + plot_w;
    let _ = writeln!(
        svg,
        r#"<line class="mean-diff" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="{MEAN_LINE_COLOR}" stroke-width="1.5"/>"#,
        y = sy(mean)
    );
    for (class, value) in [("loa-upper", high), ("loa-lower", low)] {
        let _ = writeln!(
            svg,
            r#"<line class="{class}" x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="{LIMIT_LINE_COLOR}" stroke-width="1.5" stroke-dasharray="{LIMIT_DASHARRAY}"/>"#,
            y = sy(value)
        );
    }
    for (label, value) in [("Mean", mean), ("+1.96 SD", high), ("-1.96 SD", low)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{label}: {value:.2}</text>"#,
            x1 + 6.0,
            sy(value) + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    (lo - span * 0.05, hi + span * 0.05)
}

/// Round tick positions (1, 2 or 5 times a power of ten) inside the range.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_owned() } else { s.to_owned() }
}
