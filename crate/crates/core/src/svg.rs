//! Minimal SVG figures: labelled scatter plots and histograms.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::histogram::Histogram;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 10] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str, note: Option<&str>) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    if let Some(n) = note {
        let _ = writeln!(out, "<!-- {} -->", escape(n).replace("--", "- -"));
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
}

/// Scatter plot with points coloured by label. With `disk` set the view is
/// the unit disk and its boundary is drawn.
pub fn scatter_svg(coords: &[[f64; 2]], labels: &[String], disk: bool, title: &str, note: Option<&str>) -> String {
    let mut out = String::new();
    header(&mut out, title, note);
    let (cx, cy, half) = if disk {
        (0.0, 0.0, 1.0)
    } else {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in coords {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if coords.is_empty() {
            (0.0, 0.0, 1.0)
        } else {
            let half = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / 2.0).max(1e-12) * 1.05;
            ((lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, half)
        }
    };
    let scale = (SIZE / 2.0 - MARGIN) / half;
    let map = |p: [f64; 2]| (SIZE / 2.0 + (p[0] - cx) * scale, SIZE / 2.0 - (p[1] - cy) * scale);
    if disk {
        let _ = writeln!(
            out,
            r#"<circle cx="{0}" cy="{0}" r="{1:.3}" fill="none" stroke="black"/>"#,
            SIZE / 2.0,
            scale
        );
    }
    let mut colours: BTreeMap<&str, &str> = labels.iter().map(|l| (l.as_str(), "")).collect();
    for (k, c) in colours.values_mut().enumerate() {
        *c = PALETTE[k % PALETTE.len()];
    }
    for (i, p) in coords.iter().enumerate() {
        let (x, y) = map(*p);
        let c = labels.get(i).and_then(|l| colours.get(l.as_str())).copied().unwrap_or("black");
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="{c}"/>"#);
    }
    for (k, (label, c)) in colours.iter().enumerate() {
        let y = 40.0 + 16.0 * k as f64;
        let _ = writeln!(out, r#"<circle cx="{}" cy="{y}" r="4" fill="{c}"/>"#, SIZE - 80.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            SIZE - 70.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of a histogram.
pub fn histogram_svg(h: &Histogram, title: &str, x_label: &str, note: Option<&str>) -> String {
    let mut out = String::new();
    header(&mut out, title, note);
    let bins = h.counts.len().max(1);
    let top = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let width = (SIZE - 2.0 * MARGIN) / bins as f64;
    let base = SIZE - MARGIN;
    let height = SIZE - 2.0 * MARGIN - 20.0;
    for (i, &c) in h.counts.iter().enumerate() {
        let bh = c as f64 / top * height;
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}" stroke="white"/>"#,
            MARGIN + width * i as f64,
            base - bh,
            width,
            bh,
            PALETTE[1]
        );
    }
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        SIZE - MARGIN
    );
    if let (Some(lo), Some(hi)) = (h.edges.first(), h.edges.last()) {
        for (x, v, anchor) in [(MARGIN, lo, "start"), (SIZE - MARGIN, hi, "end")] {
            let _ = writeln!(
                out,
                r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.3}</text>"#,
                base + 14.0
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        SIZE / 2.0,
        SIZE - 8.0,
        escape(x_label)
    );
    out.push_str("</svg>\n");
    out
}
