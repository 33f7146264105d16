//! Hand-rolled SVG output: polyline trajectories and simple histograms.
//! CSV is the canonical data format; these plots are a convenience.

use std::fmt::Write as _;

pub struct Panel {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub title: String,
    body: String,
}

impl Panel {
    pub fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            x_range,
            y_range,
            title: title.to_string(),
            body: String::new(),
        }
    }

    fn map(&self, w: f64, h: f64, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let fy = (y - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (fx * w, h * (1.0 - fy))
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, width: f64) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            let (px, py) = self.map(360.0, 420.0, x, y);
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px, py);
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    /// Vertical bars along the x axis, heights normalized to the tallest.
    pub fn histogram(&mut self, centers: &[f64], counts: &[usize], color: &str) {
        let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
        let span = self.y_range.1 - self.y_range.0;
        let bar_w = 360.0 / centers.len().max(1) as f64;
        for (&c, &n) in centers.iter().zip(counts) {
            if n == 0 {
                continue;
            }
            let frac = n as f64 / peak;
            let (px, py) = self.map(360.0, 420.0, c, self.y_range.0 + frac * span * 0.25);
            let (_, base) = self.map(360.0, 420.0, c, self.y_range.0);
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" opacity="0.7"/>"#,
                px - bar_w / 2.0,
                py,
                bar_w.max(1.0),
                base - py
            );
        }
    }

    pub fn marker(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let (px, py) = self.map(360.0, 420.0, x, y);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r}" fill="{color}"/>"#
        );
    }
}

/// Lay panels out side by side into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let w = 360.0;
    let h = 420.0;
    let pad = 30.0;
    let total_w = panels.len() as f64 * (w + pad) + pad;
    let total_h = h + 70.0;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let ox = pad + i as f64 * (w + pad);
        let _ = write!(
            out,
            r##"<g transform="translate({ox},50)"><rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#888"/>{}</g>"##,
            p.body
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="35" font-family="monospace" font-size="15" text-anchor="middle">{}</text>"#,
            ox + w / 2.0,
            p.title
        );
    }
    out.push_str("</svg>\n");
    out
}
