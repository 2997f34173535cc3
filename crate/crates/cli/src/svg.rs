//! Standalone SVG figures: scatters, circles and polylines with axes and a
//! legend.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Points { label: String, color: String, points: Vec<(f64, f64)> },
    Circle { label: String, color: String, center: (f64, f64), radius: f64 },
    Polyline { label: String, color: String, points: Vec<(f64, f64)> },
}

impl Layer {
    fn label(&self) -> &str {
        match self {
            Layer::Points { label, .. } | Layer::Circle { label, .. } | Layer::Polyline { label, .. } => label,
        }
    }

    fn color(&self) -> &str {
        match self {
            Layer::Points { color, .. } | Layer::Circle { color, .. } | Layer::Polyline { color, .. } => color,
        }
    }

    fn extent(&self, b: &mut Bounds) {
        match self {
            Layer::Points { points, .. } | Layer::Polyline { points, .. } => {
                for p in points {
                    b.include(*p);
                }
            }
            Layer::Circle { center, radius, .. } => {
                if radius.is_finite() {
                    b.include((center.0 - radius, center.1 - radius));
                    b.include((center.0 + radius, center.1 + radius));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    fn empty() -> Self {
        Self { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY }
    }

    fn include(&mut self, (x, y): (f64, f64)) {
        if x.is_finite() && y.is_finite() {
            self.x0 = self.x0.min(x);
            self.x1 = self.x1.max(x);
            self.y0 = self.y0.min(y);
            self.y1 = self.y1.max(y);
        }
    }

    fn padded(self) -> Self {
        if !(self.x0 <= self.x1) {
            return Bounds { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        let dx = (self.x1 - self.x0).max(1e-9) * 0.05;
        let dy = (self.y1 - self.y0).max(1e-9) * 0.05;
        Bounds { x0: self.x0 - dx, x1: self.x1 + dx, y0: self.y0 - dy, y1: self.y1 + dy }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Use one scale on both axes (for page pictures).
    pub equal_aspect: bool,
    pub bounds: Option<Bounds>,
    pub layers: Vec<Layer>,
}

const W: f64 = 640.0;
const H: f64 = 640.0;
const MARGIN: f64 = 70.0;

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            equal_aspect: false,
            bounds: None,
            layers: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut b = self.bounds.unwrap_or_else(|| {
            let mut b = Bounds::empty();
            for l in &self.layers {
                l.extent(&mut b);
            }
            b.padded()
        });
        if self.equal_aspect {
            let (cx, cy) = (0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
            let half = 0.5 * (b.x1 - b.x0).max(b.y1 - b.y0);
            b = Bounds { x0: cx - half, x1: cx + half, y0: cy - half, y1: cy + half };
        }
        let pw = W - 2.0 * MARGIN;
        let ph = H - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - b.x0) / (b.x1 - b.x0) * pw;
        let sy = |y: f64| H - MARGIN - (y - b.y0) / (b.y1 - b.y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(s, r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}"/></clipPath></defs>"#);

        // axes and ticks
        let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for v in ticks(b.x0, b.x1) {
            let x = sx(v);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, H - MARGIN, H - MARGIN + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, H - MARGIN + 18.0, tick_label(v));
        }
        for v in ticks(b.y0, b.y1) {
            let y = sy(v);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN}" y2="{y:.2}" stroke="black"/>"#, MARGIN - 5.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 8.0, y + 4.0, tick_label(v));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 25.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            H / 2.0,
            esc(&self.y_label)
        );

        let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
        for l in &self.layers {
            match l {
                Layer::Points { color, points, .. } => {
                    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{color}" fill-opacity="0.6"/>"#, sx(x), sy(y));
                    }
                }
                Layer::Circle { color, center, radius, .. } => {
                    if radius.is_finite() && center.0.is_finite() && center.1.is_finite() {
                        let rx = radius / (b.x1 - b.x0) * pw;
                        let ry = radius / (b.y1 - b.y0) * ph;
                        let _ = writeln!(
                            s,
                            r#"<ellipse cx="{:.2}" cy="{:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                            sx(center.0),
                            sy(center.1)
                        );
                    }
                }
                Layer::Polyline { color, points, .. } => {
                    let pts: Vec<String> = points
                        .iter()
                        .filter(|p| p.0.is_finite() && p.1.is_finite())
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    if !pts.is_empty() {
                        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
                    }
                }
            }
        }
        let _ = writeln!(s, "</g>");

        // legend
        for (i, l) in self.layers.iter().filter(|l| !l.label().is_empty()).enumerate() {
            let y = MARGIN + 15.0 + 16.0 * i as f64;
            let x = W - MARGIN - 150.0;
            let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/>"#, y - 9.0, l.color());
            let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 15.0, esc(l.label()));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round tick positions covering `[lo, hi]`, about five of them.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return Vec::new();
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_figure_has_axes_only() {
        let svg = Figure::new("empty", "x", "y").render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<line"));
        assert!(!svg.contains("<circle"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn layers_and_legend_render() {
        let mut f = Figure::new("t", "x", "y");
        f.equal_aspect = true;
        f.layers.push(Layer::Points { label: "pts".into(), color: "blue".into(), points: vec![(0.0, 0.0), (f64::NAN, 1.0)] });
        f.layers.push(Layer::Circle { label: "disk".into(), color: "red".into(), center: (0.0, 0.0), radius: 1.0 });
        f.layers.push(Layer::Polyline { label: "a<b".into(), color: "green".into(), points: vec![(0.0, 0.0), (1.0, 1.0)] });
        let svg = f.render();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("<ellipse"));
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn monotone_data_gives_monotone_polyline() {
        let mut f = Figure::new("curve", "n", "hit fraction");
        let data: Vec<(f64, f64)> = (1..=50).map(|n| (n as f64, 1.0 - 0.9f64.powi(n))).collect();
        f.layers.push(Layer::Polyline { label: "hits".into(), color: "black".into(), points: data });
        let svg = f.render();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split('"').nth(1).unwrap();
        let ys: Vec<f64> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap().parse().unwrap()).collect();
        // screen y grows downward
        assert!(ys.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ticks_are_round() {
        let labels: Vec<String> = ticks(0.0, 1.0).into_iter().map(tick_label).collect();
        assert_eq!(labels, ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
        assert!(ticks(1.0, 1.0).is_empty());
        assert_eq!(tick_label(-0.00001), "0");
    }
}
