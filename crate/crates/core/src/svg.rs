//! Minimal SVG writer for diagnostic plots.

use std::fmt::Write;

pub(crate) struct Canvas {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl Canvas {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            let w = (hi - lo).max(1e-9);
            (lo - 0.05 * w, hi + 0.05 * w)
        };
        Canvas {
            width: 480.0,
            height: 480.0,
            margin: 40.0,
            x_range: pad(x_range),
            y_range: pad(y_range),
            body: String::new(),
        }
    }

    pub fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let w = self.width - 2.0 * self.margin;
        let h = self.height - 2.0 * self.margin;
        (
            self.margin + (x - x0) / (x1 - x0) * w,
            self.height - self.margin - (y - y0) / (y1 - y0) * h,
        )
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        let (x1, y1) = self.px(a.0, a.1);
        let (x2, y2) = self.px(b.0, b.1);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" style="{style}"/>"#
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let (x, y) = self.px(c.0, c.1);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#
        );
    }

    pub fn triangle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let (x, y) = self.px(c.0, c.1);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"/>"#,
            x,
            y - r,
            x - r,
            y + r,
            x + r,
            y + r
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (a, b) = self.px(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" style="{style}"/>"#,
            coords.join(" ")
        );
    }

    pub fn rect(&mut self, lo: (f64, f64), hi: (f64, f64), fill: &str) {
        let (x0, y1) = self.px(lo.0, lo.1);
        let (x1, y0) = self.px(hi.0, hi.1);
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" font-size="12">{s}</text>"#
        );
    }

    pub fn axes(&mut self, x_label: &str, y_label: &str) {
        let m = self.margin;
        let (w, h) = (self.width, self.height);
        let _ = writeln!(
            self.body,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        self.text(w / 2.0 - 20.0, h - 8.0, x_label);
        self.text(4.0, m - 10.0, y_label);
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        self.text(m, h - m + 14.0, &format!("{x0:.2}"));
        self.text(w - m - 30.0, h - m + 14.0, &format!("{x1:.2}"));
        self.text(2.0, h - m, &format!("{y0:.2}"));
        self.text(2.0, m + 10.0, &format!("{y1:.2}"));
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.width, self.height, self.body
        )
    }
}
