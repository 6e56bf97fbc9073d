//! SVG rendering of a network document.

use std::fmt::Write;

use super::document::NetworkDocument;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Color for the sheet pair `(i, j)`, independent of order.
fn pair_color(i: usize, j: usize) -> &'static str {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    PALETTE[(b * (b - 1) / 2 + a) % PALETTE.len()]
}

/// One `path` per wall, `×` at turning points, `○` at punctures and `•` at
/// collisions. The view box is the domain disk, with `y` pointing up.
pub fn render_svg(doc: &NetworkDocument) -> String {
    let r = doc.domain_radius;
    let marker = r / 60.0;
    let stroke = r / 400.0;
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.6} {:.6} {:.6} {:.6}" width="800" height="800">"#,
        -r,
        -r,
        2.0 * r,
        2.0 * r
    )
    .unwrap();
    writeln!(s, r#"<g transform="scale(1,-1)">"#).unwrap();
    writeln!(
        s,
        r##"<circle class="domain" cx="0" cy="0" r="{r:.6}" fill="none" stroke="#bbbbbb" stroke-width="{stroke:.6}"/>"##
    )
    .unwrap();
    for w in &doc.walls {
        let mut d = String::new();
        for (n, p) in w.points.iter().enumerate() {
            write!(d, "{}{:.6},{:.6}", if n == 0 { "M" } else { " L" }, p[0], p[1]).unwrap();
        }
        writeln!(
            s,
            r#"<path class="wall" data-id="{}" data-sheets="{},{}" d="{d}" fill="none" stroke="{}" stroke-width="{stroke:.6}"/>"#,
            w.id,
            w.sheets[0],
            w.sheets[1],
            pair_color(w.sheets[0], w.sheets[1])
        )
        .unwrap();
    }
    for t in &doc.turning_points {
        let [x, y] = t.position;
        writeln!(
            s,
            r#"<g class="turning-point" data-id="{}" stroke="black" stroke-width="{:.6}">"#,
            t.id,
            2.0 * stroke
        )
        .unwrap();
        for (dx, dy) in [(marker, marker), (marker, -marker)] {
            writeln!(
                s,
                r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
                x - dx,
                y - dy,
                x + dx,
                y + dy
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    for p in &doc.punctures.finite {
        writeln!(
            s,
            r#"<circle class="puncture" cx="{:.6}" cy="{:.6}" r="{marker:.6}" fill="none" stroke="black" stroke-width="{:.6}"/>"#,
            p[0],
            p[1],
            2.0 * stroke
        )
        .unwrap();
    }
    for c in &doc.collisions {
        writeln!(
            s,
            r#"<circle class="collision" data-id="{}" cx="{:.6}" cy="{:.6}" r="{:.6}" fill="black"/>"#,
            c.id,
            c.point[0],
            c.point[1],
            0.6 * marker
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}
