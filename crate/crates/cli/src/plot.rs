//! Minimal SVG charts drawn from the same numbers that go into the CSV files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
    /// Symmetric y error bars.
    pub errors: Option<Vec<f64>>,
}

impl Series {
    pub fn new(label: &str, color: &'static str, style: Style, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), color, style, points, errors: None }
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Self {
        self.errors = Some(errors);
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn add(&mut self, s: Series) -> &mut Self {
        self.series.push(s);
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                let e = s.errors.as_ref().map_or(0.0, |e| e[i]);
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y - e);
                y1 = y1.max(y + e);
            }
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-300 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let pad = 0.06 * (y1 - y0).max(1e-12 * y1.abs().max(1.0));
        (x0, x1, y0 - pad, y1 + pad)
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in nice_ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(t));
        }
        for t in nice_ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, fmt_tick(t));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let pts: Vec<(usize, f64, f64)> = ser
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.0.is_finite() && p.1.is_finite())
                .map(|(i, p)| (i, sx(p.0), sy(p.1)))
                .collect();
            match ser.style {
                Style::Line | Style::Dashed => {
                    let path: Vec<String> = pts.iter().map(|(_, x, y)| format!("{x:.2},{y:.2}")).collect();
                    let dash = if ser.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                        path.join(" "),
                        ser.color
                    );
                }
                Style::Markers => {
                    for &(i, x, y) in &pts {
                        if let Some(e) = &ser.errors {
                            let (ya, yb) = (sy(ser.points[i].1 - e[i]), sy(ser.points[i].1 + e[i]));
                            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{ya:.2}" x2="{x:.2}" y2="{yb:.2}" stroke="{}"/>"#, ser.color);
                        }
                        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, ser.color);
                    }
                }
            }
            let ly = TOP + 16.0 + 16.0 * k as f64;
            let lx = LEFT + pw - 170.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>"#, ly - 4.0, lx + 18.0, ly - 4.0, ser.color);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 24.0, escape(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Colour raster of `values[row][col]` over the given axis ranges.
pub fn heatmap_svg(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64), values: &[Vec<f64>]) -> String {
    let rows = values.len().max(1);
    let cols = values.first().map_or(1, |r| r.len().max(1));
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let bound = lo.abs().max(hi.abs()).max(1e-300);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let (cw, ch) = (pw / cols as f64, ph / rows as f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            // diverging blue-white-red scale, symmetric about 0
            let t = (v / bound).clamp(-1.0, 1.0);
            let (red, green, blue) = if t >= 0.0 {
                (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
            } else {
                (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
            };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({},{},{})"/>"#,
                LEFT + c as f64 * cw,
                TOP + r as f64 * ch,
                cw + 0.3,
                ch + 0.3,
                red as u8,
                green as u8,
                blue as u8
            );
        }
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="{}">{}</text>"#, TOP + ph + 18.0, fmt_tick(x.0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT + pw, TOP + ph + 18.0, fmt_tick(x.1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + 10.0, fmt_tick(y.0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + ph, fmt_tick(y.1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    );
    s.push_str("</svg>\n");
    s
}
