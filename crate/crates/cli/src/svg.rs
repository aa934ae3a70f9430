//! Minimal self-contained SVG plotting: line charts with optional log
//! axes, spacing histograms with overlay densities, and grid heatmaps.
//! The charts are conveniences for eyeballing a run; the CSV files
//! remain the machine-readable contract.

use std::fmt::Write;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 76.0;
const RIGHT: f64 = 26.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 58.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One plotted curve or point set.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false, markers: false }
    }

    pub fn dashed(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: true, markers: false }
    }

    pub fn marked(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false, markers: true }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_x: bool,
    log_y: bool,
}

impl Frame {
    fn fit(series: &[Series], log_x: bool, log_y: bool) -> Frame {
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for s in series {
            for &(x, y) in &s.points {
                if !x.is_finite() || !y.is_finite() || (log_x && x <= 0.0) || (log_y && y <= 0.0) {
                    continue;
                }
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !x0.is_finite() {
            // Nothing plottable; pick a harmless frame.
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x0 == x1 {
            x1 = x0 + 1.0;
        }
        if y0 == y1 {
            y1 = y0 + 1.0;
        }
        let pad = |lo: f64, hi: f64, log: bool| {
            if log {
                (lo / 1.3, hi * 1.3)
            } else {
                let m = 0.04 * (hi - lo);
                (lo - m, hi + m)
            }
        };
        let (y0, y1) = pad(y0, y1, log_y);
        Frame { x0, x1, y0, y1, log_x, log_y }
    }

    fn px(&self, x: f64) -> f64 {
        let (a, b, v) = if self.log_x {
            (self.x0.ln(), self.x1.ln(), x.ln())
        } else {
            (self.x0, self.x1, x)
        };
        LEFT + (v - a) / (b - a) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b, v) = if self.log_y {
            (self.y0.ln(), self.y1.ln(), y.ln())
        } else {
            (self.y0, self.y1, y)
        };
        HEIGHT - BOTTOM - (v - a) / (b - a) * (HEIGHT - TOP - BOTTOM)
    }

    fn visible(&self, x: f64, y: f64) -> bool {
        x.is_finite()
            && y.is_finite()
            && !(self.log_x && x <= 0.0)
            && !(self.log_y && y <= 0.0)
            && x >= self.x0
            && x <= self.x1
            && y >= self.y0
            && y <= self.y1
    }
}

/// Tick positions on a 1-2-5 grid (linear) or at decades (log).
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let lo_d = lo.log10().floor() as i32;
        let hi_d = hi.log10().ceil() as i32;
        return (lo_d..=hi_d)
            .map(|d| 10f64.powi(d))
            .filter(|&v| v >= lo * 0.999 && v <= hi * 1.001)
            .collect();
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        mag
    } else if norm < 3.5 {
        2.0 * mag
    } else if norm < 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + 1e-9 * step {
        out.push(if v.abs() < 1e-12 * step { 0.0 } else { v });
        v += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.0e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let x_end = WIDTH - RIGHT;
    let y_end = HEIGHT - BOTTOM;
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        (LEFT + x_end) / 2.0,
        escape(title)
    )
    .unwrap();
    for tx in ticks(frame.x0, frame.x1, frame.log_x) {
        let px = frame.px(tx);
        writeln!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{TOP}\" x2=\"{px:.1}\" y2=\"{y_end}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            y_end + 18.0,
            fmt_tick(tx)
        )
        .unwrap();
    }
    for ty in ticks(frame.y0, frame.y1, frame.log_y) {
        let py = frame.py(ty);
        writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{py:.1}\" x2=\"{x_end}\" y2=\"{py:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            py + 4.0,
            fmt_tick(ty)
        )
        .unwrap();
    }
    writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>",
        x_end - LEFT,
        y_end - TOP
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        (LEFT + x_end) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.1})\">{}</text>",
        (TOP + y_end) / 2.0,
        (TOP + y_end) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn draw_series(out: &mut String, frame: &Frame, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if s.dashed { " stroke-dasharray=\"7 5\"" } else { "" };
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !frame.visible(x, y) {
                pen_down = false;
                continue;
            }
            let cmd = if pen_down { 'L' } else { 'M' };
            write!(path, "{cmd}{:.2} {:.2} ", frame.px(x), frame.py(y)).unwrap();
            pen_down = true;
        }
        if !path.is_empty() {
            writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>",
                path.trim_end()
            )
            .unwrap();
        }
        if s.markers {
            for &(x, y) in &s.points {
                if frame.visible(x, y) {
                    writeln!(
                        out,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>",
                        frame.px(x),
                        frame.py(y)
                    )
                    .unwrap();
                }
            }
        }
    }
    // Legend, top-right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 16.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let dash = if s.dashed { " stroke-dasharray=\"7 5\"" } else { "" };
        writeln!(
            out,
            "<line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
            x + 26.0
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            x + 32.0,
            y + 4.0,
            escape(&s.label)
        )
        .unwrap();
    }
}

pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    log_y: bool,
    series: &[Series],
) -> String {
    let frame = Frame::fit(series, log_x, log_y);
    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &frame, title, x_label, y_label);
    draw_series(&mut out, &frame, series);
    out.push_str("</svg>\n");
    out
}

/// Bars at `centers` with the given uniform width, plus overlay curves.
pub fn histogram(
    title: &str,
    x_label: &str,
    y_label: &str,
    centers: &[f64],
    density: &[f64],
    bin_width: f64,
    overlays: &[Series],
) -> String {
    assert_eq!(centers.len(), density.len(), "histogram arrays must align");
    let mut all = vec![Series::line(
        "data",
        centers.iter().zip(density).map(|(&c, &d)| (c, d)).collect(),
    )];
    all.extend(overlays.iter().map(|s| Series {
        label: s.label.clone(),
        points: s.points.clone(),
        dashed: s.dashed,
        markers: false,
    }));
    let mut frame = Frame::fit(&all, false, false);
    frame.y0 = 0.0;
    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &frame, title, x_label, y_label);
    let zero = frame.py(0.0);
    for (&c, &d) in centers.iter().zip(density) {
        let x = frame.px(c - bin_width / 2.0);
        let w = frame.px(c + bin_width / 2.0) - x;
        let y = frame.py(d);
        writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{:.2}\" \
             fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"0.5\"/>",
            (zero - y).max(0.0)
        )
        .unwrap();
    }
    draw_series(&mut out, &frame, &all[1..]);
    out.push_str("</svg>\n");
    out
}

const VIRIDIS: [(f64, [u8; 3]); 5] = [
    (0.00, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.50, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.00, [253, 231, 37]),
];

const DIVERGING: [(f64, [u8; 3]); 3] =
    [(0.00, [33, 102, 172]), (0.50, [247, 247, 247]), (1.00, [178, 24, 43])];

fn lerp_color(stops: &[(f64, [u8; 3])], t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mut prev = stops[0];
    for &stop in stops {
        if t <= stop.0 {
            let span = stop.0 - prev.0;
            let f = if span > 0.0 { (t - prev.0) / span } else { 0.0 };
            let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
            let c = [mix(prev.1[0], stop.1[0]), mix(prev.1[1], stop.1[1]), mix(prev.1[2], stop.1[2])];
            return format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
        }
        prev = stop;
    }
    let c = stops.last().unwrap().1;
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Row-major grid heatmap: `values[row * cols + col]`, row 0 at
/// `y_range.0`, column 0 at `x_range.0`. Fields that take negative
/// values get a diverging palette centered on zero; nonnegative fields
/// get a sequential one.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    cols: usize,
    rows: usize,
    values: &[f64],
) -> String {
    assert_eq!(values.len(), cols * rows, "heatmap grid must be full");
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let vmin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let diverging = vmin < 0.0;
    let (lo, hi) = if diverging {
        let m = vmax.abs().max(vmin.abs()).max(1e-300);
        (-m, m)
    } else {
        (vmin, if vmax > vmin { vmax } else { vmin + 1.0 })
    };
    let stops: &[(f64, [u8; 3])] = if diverging { &DIVERGING } else { &VIRIDIS };

    let bar_w = 60.0;
    let x_end = WIDTH - RIGHT - bar_w;
    let y_end = HEIGHT - BOTTOM;
    let frame = Frame { x0: x_range.0, x1: x_range.1, y0: y_range.0, y1: y_range.1, log_x: false, log_y: false };

    let mut out = String::new();
    header(&mut out);
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        (LEFT + x_end) / 2.0,
        escape(title)
    )
    .unwrap();
    let cw = (x_end - LEFT) / cols as f64;
    let ch = (y_end - TOP) / rows as f64;
    for r in 0..rows {
        for c in 0..cols {
            let v = values[r * cols + c];
            let t = if v.is_finite() { (v - lo) / (hi - lo) } else { 0.5 };
            // Row 0 sits at y_range.0, i.e. at the bottom of the frame.
            let y = y_end - (r + 1) as f64 * ch;
            writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                LEFT + c as f64 * cw,
                cw + 0.5,
                ch + 0.5,
                lerp_color(stops, t)
            )
            .unwrap();
        }
    }
    for tx in ticks(frame.x0, frame.x1, false) {
        let px = LEFT + (tx - frame.x0) / (frame.x1 - frame.x0) * (x_end - LEFT);
        writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            y_end + 18.0,
            fmt_tick(tx)
        )
        .unwrap();
    }
    for ty in ticks(frame.y0, frame.y1, false) {
        let py = y_end - (ty - frame.y0) / (frame.y1 - frame.y0) * (y_end - TOP);
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            py + 4.0,
            fmt_tick(ty)
        )
        .unwrap();
    }
    writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>",
        x_end - LEFT,
        y_end - TOP
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        (LEFT + x_end) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.1})\">{}</text>",
        (TOP + y_end) / 2.0,
        (TOP + y_end) / 2.0,
        escape(y_label)
    )
    .unwrap();
    // Color bar.
    let bx = x_end + 16.0;
    let steps = 64;
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let y = y_end - (i + 1) as f64 / steps as f64 * (y_end - TOP);
        writeln!(
            out,
            "<rect x=\"{bx:.1}\" y=\"{y:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>",
            (y_end - TOP) / steps as f64 + 0.5,
            lerp_color(stops, t)
        )
        .unwrap();
    }
    for (t, v) in [(0.0, lo), (0.5, (lo + hi) / 2.0), (1.0, hi)] {
        let y = y_end - t * (y_end - TOP);
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>",
            bx + 20.0,
            y + 4.0,
            fmt_tick(v)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_grids_are_round_and_inside() {
        let t = ticks(0.0, 4.0, false);
        assert_eq!(t, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let t = ticks(1.0, 1000.0, true);
        assert_eq!(t, vec![1.0, 10.0, 100.0, 1000.0]);
        for v in ticks(-0.137, 2.41, false) {
            assert!(v >= -0.137 && v <= 2.41, "tick {v} escapes the range");
        }
    }

    #[test]
    fn charts_are_well_formed_documents() {
        let series = [
            Series::line("growth", (0..40).map(|i| (i as f64, (i as f64 * 0.3).exp())).collect()),
            Series::dashed("plateau", vec![(0.0, 100.0), (40.0, 100.0)]),
        ];
        let chart = line_chart("demo", "t", "F", false, true, &series);
        assert!(chart.starts_with("<svg"));
        assert!(chart.trim_end().ends_with("</svg>"));
        assert_eq!(chart.matches("<path").count(), 2);

        let field: Vec<f64> = (0..12).map(|i| (i as f64 / 11.0) - 0.3).collect();
        let map = heatmap("field", "phi", "theta", (0.0, 6.28), (0.0, 3.14), 4, 3, &field);
        assert!(map.contains("</svg>"));
        // 12 cells plus the color bar rectangles.
        assert!(map.matches("<rect").count() > 12);
    }

    #[test]
    fn color_interpolation_hits_the_anchor_stops() {
        assert_eq!(lerp_color(&VIRIDIS, 0.0), "#440154");
        assert_eq!(lerp_color(&VIRIDIS, 1.0), "#fde725");
        assert_eq!(lerp_color(&DIVERGING, 0.5), "#f7f7f7");
    }
}
