//! Minimal deterministic SVG 1.1 plots.

use std::fmt::Write;

/// Palette for point sets, cycled.
pub const SET_COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Mark {
    Points(Vec<(f64, f64)>),
    Lines(Vec<Vec<(f64, f64)>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub label: Option<String>,
    pub color: String,
    pub width: f64,
    pub mark: Mark,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgPlot {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Data ranges; `None` fits the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub layers: Vec<Layer>,
}

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn data_range(layers: &[Layer], pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut see = |p: &(f64, f64)| {
        let v = pick(p);
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    };
    for l in layers {
        match &l.mark {
            Mark::Points(ps) => ps.iter().for_each(&mut see),
            Mark::Lines(ls) => ls.iter().flatten().for_each(&mut see),
        }
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Round-number tick positions covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl SvgPlot {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            width: 760,
            height: 520,
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range: None,
            y_range: None,
            layers: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self
            .x_range
            .unwrap_or_else(|| data_range(&self.layers, |p| p.0));
        let (y0, y1) = self
            .y_range
            .unwrap_or_else(|| data_range(&self.layers, |p| p.1));
        let w = f64::from(self.width);
        let h = f64::from(self.height);
        let pw = w - MARGIN_L - MARGIN_R;
        let ph = h - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
        );
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(s, r#"<title>{}</title>"#, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
            self.width, self.height
        );
        let _ = writeln!(
            s,
            r#"<defs><clipPath id="plot"><rect x="{MARGIN_L:.2}" y="{MARGIN_T:.2}" width="{pw:.2}" height="{ph:.2}"/></clipPath></defs>"#
        );

        let _ = writeln!(
            s,
            r#"<g font-family="sans-serif" font-size="11" fill="black">"#
        );
        for t in ticks(x0, x1, 6) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="0.5"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                MARGIN_T,
                MARGIN_T + ph,
                MARGIN_T + ph + 15.0,
                fmt_tick(t)
            );
        }
        for t in ticks(y0, y1, 6) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="0.5"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_L,
                MARGIN_L + pw,
                MARGIN_L - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L:.2}" y="{MARGIN_T:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_L + pw / 2.0,
            MARGIN_T - 15.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            MARGIN_L + pw / 2.0,
            h - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {:.2})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(s, "</g>");

        let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
        for layer in &self.layers {
            match &layer.mark {
                Mark::Points(ps) => {
                    let _ = writeln!(s, r#"<g fill="{}" stroke="none">"#, layer.color);
                    for &(x, y) in ps.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}"/>"#,
                            sx(x),
                            sy(y),
                            layer.width
                        );
                    }
                    let _ = writeln!(s, "</g>");
                }
                Mark::Lines(ls) => {
                    let _ = writeln!(
                        s,
                        r#"<g fill="none" stroke="{}" stroke-width="{:.2}" stroke-linejoin="round">"#,
                        layer.color, layer.width
                    );
                    for line in ls.iter().filter(|l| l.len() >= 2) {
                        let mut d = String::new();
                        for (i, &(x, y)) in line.iter().enumerate() {
                            let _ = write!(
                                d,
                                "{}{:.2},{:.2}",
                                if i == 0 { "M" } else { " L" },
                                sx(x),
                                sy(y)
                            );
                        }
                        let _ = writeln!(s, r#"<path d="{d}"/>"#);
                    }
                    let _ = writeln!(s, "</g>");
                }
            }
        }
        let _ = writeln!(s, "</g>");

        let labelled: Vec<&Layer> = self.layers.iter().filter(|l| l.label.is_some()).collect();
        if !labelled.is_empty() {
            let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
            for (i, l) in labelled.iter().enumerate() {
                let y = MARGIN_T + 10.0 + 18.0 * i as f64;
                let x = MARGIN_L + pw + 12.0;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                    y - 9.0,
                    l.color,
                    x + 18.0,
                    y + 1.0,
                    escape(l.label.as_deref().unwrap_or_default())
                );
            }
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}
