//! Minimal static SVG line charts for the descent curves.
//!
//! Write-only convenience output: nothing ever parses these back, so the
//! format is plain shapes and text with fixed two-decimal coordinates,
//! which also keeps re-renders byte-identical.

use std::fmt::Write;

/// One polyline. Points with non-finite or (on a log axis) non-positive
/// y values are skipped.
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 42.0;
const BOTTOM: f64 = 54.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick step of the form {1,2,5}*10^k giving roughly `target` intervals.
fn nice_step(range: f64, target: f64) -> f64 {
    let raw = range / target;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let factor = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.0e}")
    }
}

/// Renders series over a linear x axis and a linear or log10 y axis, with
/// an optional labeled vertical marker line.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    vline: Option<(f64, String)>,
    log_y: bool,
) -> String {
    let usable = |y: f64| y.is_finite() && (!log_y || y > 0.0);
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && usable(y) {
                xs.push(x);
                ys.push(if log_y { y.log10() } else { y });
            }
        }
    }
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        esc(title)
    );
    if xs.is_empty() {
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">no plottable points</text>\n</svg>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        return svg;
    }
    let (mut x_min, mut x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if let Some((vx, _)) = &vline {
        x_min = x_min.min(*vx);
        x_max = x_max.max(*vx);
    }
    let (mut y_min, mut y_max) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
        y_min -= 1.0;
    } else {
        let pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - y_min) / (y_max - y_min) * (HEIGHT - TOP - BOTTOM);

    // Gridlines and ticks.
    let x_step = nice_step(x_max - x_min, 6.0);
    let mut tick = (x_min / x_step).ceil() * x_step;
    while tick <= x_max + 1e-9 * x_step {
        let x = px(tick);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#e0e0e0\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            TOP,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 16.0,
            fmt_tick(tick)
        );
        tick += x_step;
    }
    if log_y {
        let mut decade = y_min.floor();
        while decade <= y_max + 1e-9 {
            if decade >= y_min {
                let y = py(decade);
                let _ = write!(
                    svg,
                    "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\"/>\n\
                     <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">1e{}</text>\n",
                    WIDTH - RIGHT,
                    LEFT - 6.0,
                    y + 4.0,
                    decade as i64
                );
            }
            decade += 1.0;
        }
    } else {
        let y_step = nice_step(y_max - y_min, 5.0);
        let mut tick = (y_min / y_step).ceil() * y_step;
        while tick <= y_max + 1e-9 * y_step {
            let y = py(tick);
            let _ = write!(
                svg,
                "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\"/>\n\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
                WIDTH - RIGHT,
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(tick)
            );
            tick += y_step;
        }
    }

    // Axes and labels.
    let _ = write!(
        svg,
        "<line x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{LEFT:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
         <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n\
         <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        TOP,
        HEIGHT - BOTTOM,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT,
        HEIGHT - BOTTOM,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0,
        esc(x_label),
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        esc(y_label)
    );

    if let Some((vx, label)) = &vline {
        let x = px(*vx);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#888888\" stroke-dasharray=\"5,4\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#555555\">{}</text>\n",
            TOP,
            HEIGHT - BOTTOM,
            x + 5.0,
            TOP + 12.0,
            esc(label)
        );
    }

    for s in series {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|&&(x, y)| x.is_finite() && usable(y))
            .map(|&(x, y)| (px(x), py(if log_y { y.log10() } else { y })))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>",
            s.color,
            path.join(" ")
        );
        for (x, y) in &pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.4\" fill=\"{}\"/>",
                s.color
            );
        }
    }

    // Legend, top right inside the plot area.
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            x + 26.0,
            s.color,
            x + 32.0,
            y + 4.0,
            esc(&s.label)
        );
    }

    svg.push_str("</svg>\n");
    svg
}
