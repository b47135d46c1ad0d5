//! Small deterministic SVG plots: traces, densities, rank bars, boxplots.
//!
//! Coordinates are printed with fixed precision so regenerating a plot from
//! the same inputs produces byte-identical files.

use bayesbench_core::util::{quantile, sample_sd};
use bayesbench_core::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 42.0;
const MAX_TRACE_POINTS: usize = 1000;

const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick label with a precision chosen from the axis span.
fn tick_label(v: f64, span: f64) -> String {
    let decimals = if span > 0.0 {
        (2.0 - span.log10()).ceil().clamp(0.0, 6.0) as usize
    } else {
        2
    };
    format!("{v:.decimals$}")
}

/// Maps data coordinates onto the fixed pixel canvas.
struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    /// Degenerate ranges are padded so the mapping stays finite.
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Frame {
        let pad = |lo: f64, hi: f64| {
            if hi > lo {
                (lo, hi)
            } else {
                let c = lo.abs().max(1.0);
                (lo - 0.5 * c, hi + 0.5 * c)
            }
        };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        Frame { x_min, x_max, y_min, y_max }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut body = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        );
        body.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            px(WIDTH / 2.0),
            esc(title)
        ));
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        self.body.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {style}/>\n",
            px(x1),
            px(y1),
            px(x2),
            px(y2)
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {style}/>\n",
            px(x),
            px(y),
            px(w),
            px(h)
        ));
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, style: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" {style}/>\n",
            px(cx),
            px(cy),
            px(r)
        ));
    }

    fn poly(&mut self, tag: &str, points: &[(f64, f64)], style: &str) {
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{},{}", px(x), px(y))).collect();
        self.body.push_str(&format!("<{tag} points=\"{}\" {style}/>\n", pts.join(" ")));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, s: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\"{extra}>{}</text>\n",
            px(x),
            px(y),
            esc(s)
        ));
    }

    /// Plot border, five ticks per axis, and axis labels.
    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str) {
        let left = MARGIN_LEFT;
        let right = WIDTH - MARGIN_RIGHT;
        let top = MARGIN_TOP;
        let bottom = HEIGHT - MARGIN_BOTTOM;
        self.rect(
            left,
            top,
            right - left,
            bottom - top,
            "fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"",
        );
        let x_span = frame.x_max - frame.x_min;
        let y_span = frame.y_max - frame.y_min;
        for i in 0..5 {
            let t = i as f64 / 4.0;
            let xv = frame.x_min + t * x_span;
            let yv = frame.y_min + t * y_span;
            let xp = frame.x(xv);
            let yp = frame.y(yv);
            self.line(xp, bottom, xp, bottom + 4.0, "stroke=\"#444444\"");
            self.text(xp, bottom + 16.0, "middle", "", &tick_label(xv, x_span));
            self.line(left - 4.0, yp, left, yp, "stroke=\"#444444\"");
            self.text(left - 7.0, yp + 3.5, "end", "", &tick_label(yv, y_span));
        }
        self.text((left + right) / 2.0, HEIGHT - 8.0, "middle", "", x_label);
        self.text(
            14.0,
            (top + bottom) / 2.0,
            "middle",
            &format!(" transform=\"rotate(-90 14 {})\"", px((top + bottom) / 2.0)),
            y_label,
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(format!("{what} contains a non-finite value")));
    }
    Ok(())
}

/// One polyline per chain against iteration index; long chains are thinned to
/// at most [`MAX_TRACE_POINTS`] points each.
pub fn trace_plot(title: &str, chains: &[Vec<f64>]) -> Result<String> {
    if chains.is_empty() || chains.iter().any(|c| c.is_empty()) {
        return Err(Error::validation("trace plot needs non-empty chains"));
    }
    let max_len = chains.iter().map(|c| c.len()).max().expect("non-empty");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for chain in chains {
        finite(chain, "trace values")?;
        for &v in chain {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let frame = Frame::new(0.0, (max_len - 1).max(1) as f64, lo, hi);
    let mut svg = Svg::new(title);
    svg.axes(&frame, "iteration", "value");
    for (c, chain) in chains.iter().enumerate() {
        let stride = chain.len().div_ceil(MAX_TRACE_POINTS).max(1);
        let points: Vec<(f64, f64)> = chain
            .iter()
            .enumerate()
            .step_by(stride)
            .map(|(i, &v)| (frame.x(i as f64), frame.y(v)))
            .collect();
        svg.poly(
            "polyline",
            &points,
            &format!(
                "fill=\"none\" stroke=\"{}\" stroke-width=\"1\" opacity=\"0.8\"",
                color(c)
            ),
        );
    }
    Ok(svg.finish())
}

/// Gaussian kernel density of `samples` on an even grid, Silverman bandwidth.
fn kde_curve(samples: &[f64], n_grid: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let n = samples.len() as f64;
    let sd = sample_sd(samples);
    let iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    let mut h = 0.9 * sd.min(iqr / 1.34) * n.powf(-0.2);
    if !(h > 0.0) && sd > 0.0 {
        h = sd * n.powf(-0.2);
    }
    if !(h > 0.0) {
        h = samples[0].abs().max(1.0) * 1e-3;
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let xs: Vec<f64> = (0..n_grid)
        .map(|i| lo + (hi - lo) * i as f64 / (n_grid - 1) as f64)
        .collect();
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| norm * samples.iter().map(|&s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    (xs, ys, h)
}

fn kde_at(samples: &[f64], h: f64, x: f64) -> f64 {
    let n = samples.len() as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    norm * samples.iter().map(|&s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>()
}

/// Kernel density estimate with an optional shaded interval and an optional
/// vertical marker line.
pub fn density_plot(
    title: &str,
    samples: &[f64],
    shade: Option<(f64, f64)>,
    marker: Option<f64>,
) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::validation("density plot needs samples"));
    }
    finite(samples, "density samples")?;
    let (xs, ys, h) = kde_curve(samples, 200);
    let y_max = ys.iter().cloned().fold(0.0_f64, f64::max);
    let frame = Frame::new(xs[0], *xs.last().expect("grid"), 0.0, y_max * 1.05);
    let mut svg = Svg::new(title);

    if let Some((lo, hi)) = shade {
        let mut poly = vec![(frame.x(lo), frame.y(0.0)), (frame.x(lo), frame.y(kde_at(samples, h, lo)))];
        for (&x, &y) in xs.iter().zip(&ys) {
            if x > lo && x < hi {
                poly.push((frame.x(x), frame.y(y)));
            }
        }
        poly.push((frame.x(hi), frame.y(kde_at(samples, h, hi))));
        poly.push((frame.x(hi), frame.y(0.0)));
        svg.poly(
            "polygon",
            &poly,
            &format!("fill=\"{}\" opacity=\"0.25\" stroke=\"none\"", color(0)),
        );
    }
    let curve: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(&x, &y)| (frame.x(x), frame.y(y))).collect();
    svg.poly(
        "polyline",
        &curve,
        &format!("fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"", color(0)),
    );
    if let Some(m) = marker {
        let xm = frame.x(m.clamp(frame.x_min, frame.x_max));
        svg.line(
            xm,
            frame.y(0.0),
            xm,
            MARGIN_TOP,
            &format!("stroke=\"{}\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"", color(3)),
        );
    }
    svg.axes(&frame, "value", "density");
    Ok(svg.finish())
}

/// Grouped bar chart of rank probabilities: one group per rank, one bar per
/// algorithm inside each group, with a legend.
pub fn rank_bars(labels: &[String], rank_probs: &[Vec<f64>]) -> Result<String> {
    let n = labels.len();
    if n == 0 || rank_probs.len() != n || rank_probs.iter().any(|r| r.len() != n) {
        return Err(Error::validation("rank probabilities must be square in the label count"));
    }
    for row in rank_probs {
        finite(row, "rank probabilities")?;
    }
    let frame = Frame::new(0.0, n as f64, 0.0, 1.0);
    let mut svg = Svg::new("posterior rank probabilities");
    let bottom = HEIGHT - MARGIN_BOTTOM;
    let left = MARGIN_LEFT;
    for i in 0..5 {
        let yv = i as f64 / 4.0;
        let yp = frame.y(yv);
        self_tick(&mut svg, left, yp, &tick_label(yv, 1.0));
    }
    let group_w = frame.x(1.0) - frame.x(0.0);
    let bar_w = group_w * 0.8 / n as f64;
    for rank in 0..n {
        let x0 = frame.x(rank as f64) + group_w * 0.1;
        for (a, probs) in rank_probs.iter().enumerate() {
            let p = probs[rank];
            svg.rect(
                x0 + a as f64 * bar_w,
                frame.y(p),
                bar_w,
                bottom - frame.y(p),
                &format!("fill=\"{}\"", color(a)),
            );
        }
        svg.text(
            frame.x(rank as f64 + 0.5),
            bottom + 16.0,
            "middle",
            "",
            &format!("rank {}", rank + 1),
        );
    }
    svg.rect(
        left,
        MARGIN_TOP,
        WIDTH - MARGIN_RIGHT - left,
        bottom - MARGIN_TOP,
        "fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"",
    );
    for (a, label) in labels.iter().enumerate() {
        let lx = left + 10.0 + a as f64 * 90.0;
        svg.rect(lx, MARGIN_TOP + 6.0, 10.0, 10.0, &format!("fill=\"{}\"", color(a)));
        svg.text(lx + 14.0, MARGIN_TOP + 15.0, "start", "", label);
    }
    svg.text((left + WIDTH - MARGIN_RIGHT) / 2.0, HEIGHT - 8.0, "middle", "", "rank");
    svg.text(
        14.0,
        (MARGIN_TOP + bottom) / 2.0,
        "middle",
        &format!(" transform=\"rotate(-90 14 {})\"", px((MARGIN_TOP + bottom) / 2.0)),
        "probability",
    );
    Ok(svg.finish())
}

fn self_tick(svg: &mut Svg, left: f64, yp: f64, label: &str) {
    svg.line(left - 4.0, yp, left, yp, "stroke=\"#444444\"");
    svg.text(left - 7.0, yp + 3.5, "end", "", label);
}

/// Tukey boxplots side by side: box at the quartiles, whiskers to the most
/// extreme points within 1.5 IQR, remaining points drawn individually.
pub fn grouped_boxplot(
    title: &str,
    y_label: &str,
    labels: &[String],
    groups: &[Vec<f64>],
) -> Result<String> {
    if labels.is_empty() || labels.len() != groups.len() {
        return Err(Error::validation("boxplot needs one label per group"));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::validation("boxplot groups must be non-empty"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for group in groups {
        finite(group, "boxplot values")?;
        for &v in group {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let pad = 0.05 * (hi - lo).max(lo.abs().max(1.0) * 1e-3);
    let n = groups.len();
    let frame = Frame::new(0.0, n as f64, lo - pad, hi + pad);
    let mut svg = Svg::new(title);
    let bottom = HEIGHT - MARGIN_BOTTOM;
    let left = MARGIN_LEFT;
    let y_span = frame.y_max - frame.y_min;
    for i in 0..5 {
        let yv = frame.y_min + y_span * i as f64 / 4.0;
        self_tick(&mut svg, left, frame.y(yv), &tick_label(yv, y_span));
    }
    let slot = frame.x(1.0) - frame.x(0.0);
    let half = slot * 0.25;
    for (g, group) in groups.iter().enumerate() {
        let cx = frame.x(g as f64 + 0.5);
        let q1 = quantile(group, 0.25);
        let q2 = quantile(group, 0.5);
        let q3 = quantile(group, 0.75);
        let iqr = q3 - q1;
        let fence_lo = q1 - 1.5 * iqr;
        let fence_hi = q3 + 1.5 * iqr;
        let w_lo = group.iter().cloned().filter(|&v| v >= fence_lo).fold(f64::INFINITY, f64::min);
        let w_hi = group.iter().cloned().filter(|&v| v <= fence_hi).fold(f64::NEG_INFINITY, f64::max);
        let stroke = format!("stroke=\"{}\" stroke-width=\"1.2\"", color(g));
        svg.line(cx, frame.y(w_lo), cx, frame.y(q1), &stroke);
        svg.line(cx, frame.y(q3), cx, frame.y(w_hi), &stroke);
        svg.line(cx - half * 0.6, frame.y(w_lo), cx + half * 0.6, frame.y(w_lo), &stroke);
        svg.line(cx - half * 0.6, frame.y(w_hi), cx + half * 0.6, frame.y(w_hi), &stroke);
        svg.rect(
            cx - half,
            frame.y(q3),
            2.0 * half,
            frame.y(q1) - frame.y(q3),
            &format!("fill=\"{}\" opacity=\"0.35\" {stroke}", color(g)),
        );
        svg.line(cx - half, frame.y(q2), cx + half, frame.y(q2), &stroke);
        for &v in group.iter().filter(|&&v| v < fence_lo || v > fence_hi) {
            svg.circle(cx, frame.y(v), 2.0, &format!("fill=\"{}\" opacity=\"0.7\"", color(g)));
        }
        svg.text(cx, bottom + 16.0, "middle", "", &labels[g]);
    }
    svg.rect(
        left,
        MARGIN_TOP,
        WIDTH - MARGIN_RIGHT - left,
        bottom - MARGIN_TOP,
        "fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"",
    );
    svg.text(
        14.0,
        (MARGIN_TOP + bottom) / 2.0,
        "middle",
        &format!(" transform=\"rotate(-90 14 {})\"", px((MARGIN_TOP + bottom) / 2.0)),
        y_label,
    );
    Ok(svg.finish())
}
