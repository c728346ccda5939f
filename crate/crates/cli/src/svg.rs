//! Minimal SVG plots: axes, polylines, markers and labels.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 56.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[derive(Debug, Clone)]
pub struct Plot {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    legend: Vec<(String, String)>,
    title: String,
    x_label: String,
    y_label: String,
}

impl Plot {
    /// A plot over `x × y`; degenerate or non-finite ranges are widened.
    pub fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let fix = |(a, b): (f64, f64)| {
            let (a, b) = if a.is_finite() && b.is_finite() {
                (a.min(b), a.max(b))
            } else {
                (0.0, 1.0)
            };
            if b - a > 1e-12 * (1.0 + a.abs()) {
                (a - 0.04 * (b - a), b + 0.04 * (b - a))
            } else {
                (a - 0.5, b + 0.5)
            }
        };
        Plot {
            x: fix(x),
            y: fix(y),
            body: String::new(),
            legend: Vec::new(),
            title: title.into(),
            x_label: String::new(),
            y_label: String::new(),
        }
    }

    /// Same scale on both axes, covering `[-r, r]²`.
    pub fn square(title: &str, r: f64) -> Self {
        let r = if r.is_finite() && r > 0.0 { r } else { 1.0 };
        let mut p = Plot::new(title, (0.0, 1.0), (0.0, 1.0));
        p.x = (-r * 4.0 / 3.0, r * 4.0 / 3.0);
        p.y = (-r, r);
        p
    }

    pub fn labels(mut self, x: &str, y: &str) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * PAD)
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite()
    }

    pub fn polyline(
        &mut self,
        points: &[(f64, f64)],
        color: &str,
        width: f64,
        label: Option<&str>,
    ) {
        let mut pts = String::new();
        for &(x, y) in points.iter().filter(|&&(x, y)| self.inside(x, y)) {
            let _ = write!(pts, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        if pts.is_empty() {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
            pts.trim_end()
        );
        if let Some(l) = label {
            self.legend.push((l.into(), color.into()));
        }
    }

    pub fn dashed(&mut self, a: (f64, f64), b: (f64, f64), color: &str, label: Option<&str>) {
        if !(self.inside(a.0, a.1) && self.inside(b.0, b.1)) {
            return;
        }
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        );
        if let Some(l) = label {
            self.legend.push((l.into(), color.into()));
        }
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        if self.inside(x, y) {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{color}" fill-opacity="0.7"/>"#,
                self.px(x),
                self.py(y)
            );
        }
    }

    pub fn star(&mut self, x: f64, y: f64, color: &str, label: Option<&str>) {
        if !self.inside(x, y) {
            return;
        }
        let (cx, cy) = (self.px(x), self.py(y));
        let mut pts = String::new();
        for k in 0..10 {
            let r = if k % 2 == 0 { 9.0 } else { 4.0 };
            let t = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
            let _ = write!(pts, "{:.2},{:.2} ", cx + r * t.cos(), cy + r * t.sin());
        }
        let _ = writeln!(
            self.body,
            r#"<polygon fill="{color}" stroke="black" stroke-width="0.5" points="{}"/>"#,
            pts.trim_end()
        );
        if let Some(l) = label {
            self.legend.push((l.into(), color.into()));
        }
    }

    fn ticks(lo: f64, hi: f64) -> Vec<f64> {
        let raw = (hi - lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= hi + 1e-9 * step {
            out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
            t += step;
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let (x0, x1, y0, y1) = (PAD, WIDTH - PAD, PAD, HEIGHT - PAD);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        for t in Self::ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                y1 + 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y1 + 16.0,
                fmt_tick(t)
            );
        }
        for t in Self::ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#,
                x0 - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            s,
            r#"<clipPath id="plot-area"><rect x="{x0}" y="{y0}" width="{}" height="{}"/></clipPath>"#,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(s, r#"<g clip-path="url(#plot-area)">"#);
        s.push_str(&self.body);
        let _ = writeln!(s, "</g>");
        for (k, (label, color)) in self.legend.iter().enumerate() {
            let y = y0 + 14.0 + 16.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/>"#,
                x1 - 150.0,
                y - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{y}">{}</text>"#,
                x1 - 132.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(t: f64) -> String {
    let a = t.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{t:.0e}")
    } else {
        let s = format!("{t:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
