//! Minimal hand-written SVG documents.
//!
//! Coordinates are printed with a fixed number of decimals, so identical
//! inputs give identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Affine map from data coordinates to the drawing area (y up).
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    /// Fit the bounding box of `points`; `equal_aspect` keeps circles round.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a [f64; 2]>, equal_aspect: bool) -> Frame {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for i in 0..2 {
                if p[i].is_finite() {
                    lo[i] = lo[i].min(p[i]);
                    hi[i] = hi[i].max(p[i]);
                }
            }
        }
        for i in 0..2 {
            if !(lo[i] <= hi[i]) {
                (lo[i], hi[i]) = (-1.0, 1.0);
            }
            let span = hi[i] - lo[i];
            let pad = if span > 0.0 { 0.05 * span } else { 1.0 };
            lo[i] -= pad;
            hi[i] += pad;
        }
        let mut sx = (WIDTH - 2.0 * MARGIN) / (hi[0] - lo[0]);
        let mut sy = (HEIGHT - 2.0 * MARGIN) / (hi[1] - lo[1]);
        let (mut x0, mut y0) = (lo[0], lo[1]);
        if equal_aspect {
            let s = sx.min(sy);
            x0 -= ((WIDTH - 2.0 * MARGIN) / s - (hi[0] - lo[0])) / 2.0;
            y0 -= ((HEIGHT - 2.0 * MARGIN) / s - (hi[1] - lo[1])) / 2.0;
            sx = s;
            sy = s;
        }
        Frame { x0, y0, sx, sy }
    }

    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        [
            MARGIN + (p[0] - self.x0) * self.sx,
            HEIGHT - MARGIN - (p[1] - self.y0) * self.sy,
        ]
    }

    pub fn scale(&self) -> [f64; 2] {
        [self.sx, self.sy]
    }
}

pub struct Svg {
    body: String,
}

impl Svg {
    pub fn new(title: &str) -> Svg {
        let mut s = Svg { body: String::new() };
        s.text([WIDTH / 2.0, 24.0], title, "middle");
        s
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], closed: bool, class: &str, stroke: &str) {
        if pts.is_empty() {
            return;
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let mut coords = String::new();
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                coords.push(' ');
            }
            write!(coords, "{:.3},{:.3}", p[0], p[1]).unwrap();
        }
        writeln!(
            self.body,
            r#"<{tag} class="{class}" points="{coords}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#
        )
        .unwrap();
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str) {
        writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{stroke}" stroke-width="1"/>"#,
            a[0], a[1], b[0], b[1]
        )
        .unwrap();
    }

    pub fn circle(&mut self, c: [f64; 2], r: f64, class: &str, fill: &str) {
        writeln!(
            self.body,
            r#"<circle class="{class}" cx="{:.3}" cy="{:.3}" r="{r:.1}" fill="{fill}"/>"#,
            c[0], c[1]
        )
        .unwrap();
    }

    pub fn rect(&mut self, corner: [f64; 2], size: [f64; 2], fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map_or(String::new(), |s| format!(r#" stroke="{s}" stroke-width="1""#));
        writeln!(
            self.body,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"{stroke}/>"#,
            corner[0], corner[1], size[0], size[1]
        )
        .unwrap();
    }

    pub fn text(&mut self, at: [f64; 2], s: &str, anchor: &str) {
        writeln!(
            self.body,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            at[0],
            at[1],
            escape(s)
        )
        .unwrap();
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Split a sampled curve at gaps, mapping every run through `frame`.
pub fn runs(frame: &Frame, pts: &[Option<[f64; 2]>]) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for p in pts {
        match p {
            Some(p) => cur.push(frame.map(*p)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub const PALETTE: [&str; 6] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_aspect_frame_is_isotropic() {
        let f = Frame::fit(&[[0.0, 0.0], [4.0, 1.0]], true);
        let [sx, sy] = f.scale();
        assert_eq!(sx, sy);
        let a = f.map([0.0, 0.0]);
        let b = f.map([1.0, 1.0]);
        assert!(((b[0] - a[0]) + (b[1] - a[1])).abs() < 1e-9);
    }

    #[test]
    fn runs_split_at_gaps() {
        let f = Frame::fit(&[[0.0, 0.0], [1.0, 1.0]], false);
        let r = runs(&f, &[Some([0.0, 0.0]), None, Some([1.0, 1.0]), Some([0.5, 0.5])]);
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].len(), 2);
    }

    #[test]
    fn text_is_escaped() {
        let mut s = Svg::new("a<b");
        s.text([0.0, 0.0], "x & y", "start");
        let doc = s.finish();
        assert!(doc.contains("a&lt;b") && doc.contains("x &amp; y"));
    }
}
