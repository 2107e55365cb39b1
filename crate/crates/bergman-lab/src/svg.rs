//! Minimal SVG 1.1 rendering of a type diagram on a fixed 800×800 canvas.

use bergman_lab_core::classifier::{to_f64, DiagramRegion, RegionPolygon};
use std::fmt::Write as _;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 90.0;
const SIDE: f64 = SIZE - 2.0 * MARGIN;

fn sx(x: f64) -> f64 {
    MARGIN + SIDE * x
}

fn sy(y: f64) -> f64 {
    SIZE - MARGIN - SIDE * y
}

fn corners(poly: &RegionPolygon) -> Vec<(f64, f64)> {
    poly.vertices.iter().map(|v| (sx(to_f64(&v.inv_p)), sy(to_f64(&v.inv_q)))).collect()
}

fn path(points: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Filled bounded region, hatched compact region, open edges dashed, open
/// corners hollow, and the symmetry line `1/p + 1/q = 1`.
pub fn render(region: &DiagramRegion, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(s, r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="800" viewBox="0 0 800 800">"##);
    let _ = writeln!(
        s,
        r##"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="10" height="10"><path d="M0,10 L10,0" stroke="#1f4e79" stroke-width="1.5"/></pattern></defs>"##
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="800" height="800" fill="white"/>"##);
    let _ = writeln!(s, r##"<text x="400" y="45" font-family="sans-serif" font-size="22" text-anchor="middle">{}</text>"##, escape(title));

    if !region.bounded.is_empty() {
        let pts = corners(&region.bounded);
        let _ = writeln!(s, r##"<path id="bounded" d="{}" fill="#9ecae1" stroke="none"/>"##, path(&pts));
    }
    if !region.compact.is_empty() {
        let pts = corners(&region.compact);
        let _ = writeln!(s, r##"<path id="compact" d="{}" fill="url(#hatch)" stroke="none"/>"##, path(&pts));
    }
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{SIDE:.3}" height="{SIDE:.3}" fill="none" stroke="black" stroke-width="2"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line id="symmetry-line" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-width="1.5" stroke-dasharray="4,6"/>"##,
        sx(0.0),
        sy(1.0),
        sx(1.0),
        sy(0.0)
    );
    if !region.bounded.is_empty() {
        let pts = corners(&region.bounded);
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let dash = if region.bounded.closed_edges[i] { "" } else { r##" stroke-dasharray="8,6""## };
            let _ = writeln!(
                s,
                r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#08306b" stroke-width="2.5"{dash}/>"##,
                a.0, a.1, b.0, b.1
            );
        }
        for (v, (x, y)) in region.bounded.vertices.iter().zip(&pts) {
            let fill = if v.included { "#08306b" } else { "white" };
            let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="5" fill="{fill}" stroke="#08306b" stroke-width="2"/>"##);
        }
    }
    for (t, label) in [(0.0, "0"), (0.5, "1/2"), (1.0, "1")] {
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="16" text-anchor="middle">{label}</text>"##,
            sx(t),
            sy(0.0) + 25.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="16" text-anchor="end">{label}</text>"##,
            sx(0.0) - 10.0,
            sy(t) + 5.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="400" y="{:.3}" font-family="sans-serif" font-size="20" text-anchor="middle">1/p</text>"##,
        SIZE - MARGIN + 55.0
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.3}" y="400" font-family="sans-serif" font-size="20" text-anchor="middle" transform="rotate(-90 {:.3} 400)">1/q</text>"##,
        MARGIN - 55.0,
        MARGIN - 55.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
