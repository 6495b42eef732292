//! SVG rendering of a timeline layout.

use std::fmt::Write;

use crate::clustering::{ClusterLabel, Clustering};
use crate::layout::LayoutResult;

const PALETTE: &[&str] = &[
    "#1f77b4", "#9467bd", "#2ca02c", "#d62728", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173",
];
const GREY: &str = "#b4b4b4";

const WIDTH: f64 = 960.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 60.0;
const MARGIN_Y: f64 = 40.0;
const ROW: f64 = 56.0;

pub fn cluster_color(label: Option<ClusterLabel>) -> &'static str {
    match label {
        Some(ClusterLabel::Cluster(c)) => PALETTE[(c as usize - 1) % PALETTE.len()],
        _ => GREY,
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders nodes as labelled circles coloured by cluster (grey when
/// unassigned or unclustered) and citations as curves from the citing node
/// up to the cited one.
pub fn render_svg(layout: &LayoutResult, clustering: Option<&Clustering>) -> String {
    let rows = layout.layer_years.len().max(1);
    let height = 2.0 * MARGIN_Y + (rows - 1) as f64 * ROW;
    let span = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let pos = layout.positions();
    let xy = |x: f64, layer: usize| (MARGIN_LEFT + x * span, MARGIN_Y + layer as f64 * ROW);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    for (layer, year) in layout.layer_years.iter().enumerate() {
        let (_, y) = xy(0.0, layer);
        let _ = writeln!(
            out,
            r##"<text x="10" y="{:.2}" fill="#555555">{year}</text>"##,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r##"<g fill="none" stroke="#999999" stroke-width="1" stroke-opacity="0.6">"##
    );
    for (citing, cited) in &layout.edges {
        let (a, b) = (pos[citing], pos[cited]);
        let (x1, y1) = xy(a.x, a.layer);
        let (x2, y2) = xy(b.x, b.layer);
        // Bow sideways so edges between aligned nodes stay distinguishable.
        let cx = (x1 + x2) / 2.0 + (y1 - y2).abs() * 0.25;
        let cy = (y1 + y2) / 2.0;
        let _ = writeln!(
            out,
            r#"<path d="M {x1:.2} {y1:.2} Q {cx:.2} {cy:.2} {x2:.2} {y2:.2}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");
    for node in &layout.nodes {
        let (x, y) = xy(node.x, node.layer);
        let color = cluster_color(clustering.and_then(|c| c.label(node.id)));
        let _ = writeln!(
            out,
            r##"<g><circle cx="{x:.2}" cy="{y:.2}" r="6" fill="{color}" stroke="#333333" stroke-width="0.5"/><text x="{:.2}" y="{:.2}">{}</text><title>{} ({})</title></g>"##,
            x + 8.0,
            y - 6.0,
            escape(&node.label),
            escape(&node.label),
            node.year
        );
    }
    out.push_str("</svg>\n");
    out
}
