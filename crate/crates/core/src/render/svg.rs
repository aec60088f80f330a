//! Deterministic SVG 1.1 serialization of [`DiagramDoc`].
//!
//! Elements are written in document order and every coordinate uses fixed
//! six-decimal formatting, so equal documents give byte-identical text.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::diagram::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape, WorldBounds};

pub(crate) const LINE_HEIGHT: f64 = 1.3;
pub(crate) const CHAR_WIDTH: f64 = 0.6;
pub(crate) const PADDING: f64 = 8.0;
const WORLD_MARGIN: f64 = 30.0;
const FONT_FAMILY: &str = "Helvetica, Arial, sans-serif";

/// Size of the padded box needed to hold `lines` at `font_size`.
pub(crate) fn text_extent(lines: &[String], font_size: f64) -> (f64, f64) {
    let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
    (
        longest * CHAR_WIDTH * font_size + 2.0 * PADDING,
        lines.len() as f64 * LINE_HEIGHT * font_size + 2.0 * PADDING,
    )
}

fn num(v: f64) -> String {
    // avoid "-0.000000"
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn color_slug(c: &Color) -> String {
    c.as_str().trim_start_matches('#').to_string()
}

fn gradient_id(c: &Color) -> String {
    format!("grad-{}", color_slug(c))
}

fn marker_id(kind: ArrowHead, c: &Color) -> String {
    let k = match kind {
        ArrowHead::Open => "open",
        ArrowHead::Hollow => "hollow",
        ArrowHead::None => "none",
    };
    format!("arrow-{k}-{}", color_slug(c))
}

fn paint_ref(p: &Paint) -> String {
    match p {
        Paint::Solid(c) => c.as_str().to_string(),
        Paint::Gradient(c) => format!("url(#{})", gradient_id(c)),
    }
}

/// Maps document coordinates to pixels.
#[derive(Clone, Copy)]
struct Mapper {
    scale: f64,
    tx: f64,
    ty: f64,
    flip: bool,
}

impl Mapper {
    fn identity() -> Mapper {
        Mapper {
            scale: 1.0,
            tx: 0.0,
            ty: 0.0,
            flip: false,
        }
    }

    fn world(doc: &DiagramDoc, w: &WorldBounds) -> Mapper {
        let span_x = (w.max.x - w.min.x).max(1e-9);
        let span_y = (w.max.y - w.min.y).max(1e-9);
        let avail_x = (doc.width - 2.0 * WORLD_MARGIN).max(1.0);
        let avail_y = (doc.height - 2.0 * WORLD_MARGIN).max(1.0);
        let scale = (avail_x / span_x).min(avail_y / span_y);
        let tx = WORLD_MARGIN + (avail_x - scale * span_x) / 2.0 - scale * w.min.x;
        let ty = doc.height - WORLD_MARGIN - (avail_y - scale * span_y) / 2.0 + scale * w.min.y;
        Mapper {
            scale,
            tx,
            ty,
            flip: true,
        }
    }

    fn point(&self, p: Point) -> Point {
        if self.flip {
            Point::new(self.tx + self.scale * p.x, self.ty - self.scale * p.y)
        } else {
            p
        }
    }

    fn length(&self, v: f64) -> f64 {
        v * self.scale
    }
}

/// Serializes the document as standalone SVG 1.1 text.
pub fn to_svg(doc: &DiagramDoc) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(doc.width),
        h = num(doc.height)
    );
    if doc.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }

    write_defs(&mut out, doc);
    let _ = writeln!(
        out,
        r#"<rect x="0.000000" y="0.000000" width="{}" height="{}" fill="white"/>"#,
        num(doc.width),
        num(doc.height)
    );
    let mapper = match &doc.world {
        Some(w) => Mapper::world(doc, w),
        None => Mapper::identity(),
    };
    for item in &doc.elements {
        write_item(&mut out, item, mapper);
    }
    for item in &doc.overlay {
        write_item(&mut out, item, Mapper::identity());
    }
    out.push_str("</svg>\n");
    out
}

fn write_defs(out: &mut String, doc: &DiagramDoc) {
    let mut gradients = BTreeSet::new();
    let mut markers = BTreeSet::new();
    for item in doc.elements.iter().chain(&doc.overlay) {
        match &item.shape {
            Shape::Box { fill, .. } | Shape::Circle { fill, .. } => {
                if let Paint::Gradient(c) = fill {
                    gradients.insert(c.clone());
                }
            }
            Shape::Line { arrow, stroke, .. } if *arrow != ArrowHead::None => {
                markers.insert((marker_id(*arrow, stroke), *arrow == ArrowHead::Hollow, stroke.clone()));
            }
            _ => {}
        }
    }
    if gradients.is_empty() && markers.is_empty() {
        return;
    }
    out.push_str("<defs>\n");
    for c in &gradients {
        let _ = writeln!(
            out,
            r#"<linearGradient id="{}" x1="0" y1="0" x2="0" y2="1"><stop offset="0" stop-color="white"/><stop offset="1" stop-color="{}"/></linearGradient>"#,
            gradient_id(c),
            c.as_str()
        );
    }
    for (id, hollow, c) in &markers {
        let fill = if *hollow { "white" } else { "none" };
        let path = if *hollow {
            "M0,0 L10,5 L0,10 Z"
        } else {
            "M0,0 L10,5 L0,10"
        };
        let _ = writeln!(
            out,
            r#"<marker id="{id}" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="10" markerHeight="10" orient="auto" markerUnits="userSpaceOnUse"><path d="{path}" fill="{fill}" stroke="{}"/></marker>"#,
            c.as_str()
        );
    }
    out.push_str("</defs>\n");
}

#[allow(clippy::too_many_arguments)]
fn write_lines(
    out: &mut String,
    lines: &[String],
    x: f64,
    top: f64,
    font_size: f64,
    anchor: &str,
    color: &str,
    bold_first: bool,
) {
    for (i, line) in lines.iter().enumerate() {
        let y = top + font_size * (LINE_HEIGHT * i as f64 + 1.0);
        let weight = if bold_first && i == 0 {
            r#" font-weight="bold""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<text xml:space="preserve" x="{}" y="{}" font-family="{FONT_FAMILY}" font-size="{}" text-anchor="{anchor}" fill="{color}"{weight}>{}</text>"#,
            num(x),
            num(y),
            num(font_size),
            escape(line)
        );
    }
}

fn write_item(out: &mut String, item: &Item, m: Mapper) {
    let id = escape(&item.id);
    match &item.shape {
        Shape::Box {
            origin,
            width,
            height,
            corner_radius,
            fill,
            lines,
            font_size,
        } => {
            let (w, h) = (m.length(*width), m.length(*height));
            let corner = if m.flip {
                m.point(Point::new(origin.x, origin.y + height))
            } else {
                *origin
            };
            let _ = writeln!(
                out,
                r#"<g id="{id}"><rect x="{}" y="{}" width="{}" height="{}" rx="{}" ry="{}" fill="{}" stroke="black" stroke-width="1"/>"#,
                num(corner.x),
                num(corner.y),
                num(w),
                num(h),
                num(*corner_radius),
                num(*corner_radius),
                paint_ref(fill)
            );
            write_lines(
                out,
                lines,
                corner.x + PADDING,
                corner.y + PADDING,
                *font_size,
                "start",
                "black",
                true,
            );
            out.push_str("</g>\n");
        }
        Shape::Circle {
            center,
            radius,
            fill,
            label,
            font_size,
        } => {
            let c = m.point(*center);
            let _ = writeln!(
                out,
                r#"<g id="{id}"><circle cx="{}" cy="{}" r="{}" fill="{}" stroke="black" stroke-width="1"/>"#,
                num(c.x),
                num(c.y),
                num(m.length(*radius)),
                paint_ref(fill)
            );
            let block = label.len() as f64 * LINE_HEIGHT * font_size;
            write_lines(out, label, c.x, c.y - block / 2.0, *font_size, "middle", "black", false);
            out.push_str("</g>\n");
        }
        Shape::Line {
            points,
            stroke,
            arrow,
            dashed,
        } => {
            let pts: Vec<String> = points
                .iter()
                .map(|p| {
                    let q = m.point(*p);
                    format!("{},{}", num(q.x), num(q.y))
                })
                .collect();
            let dash = if *dashed { r#" stroke-dasharray="4 3""# } else { "" };
            let marker = match arrow {
                ArrowHead::None => String::new(),
                kind => format!(r#" marker-end="url(#{})""#, marker_id(*kind, stroke)),
            };
            let _ = writeln!(
                out,
                r#"<polyline id="{id}" points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}{marker}/>"#,
                pts.join(" "),
                stroke.as_str()
            );
        }
        Shape::TextBlock {
            origin,
            lines,
            font_size,
            color,
        } => {
            let o = m.point(*origin);
            let _ = writeln!(out, r#"<g id="{id}">"#);
            write_lines(out, lines, o.x, o.y, *font_size, "start", color.as_str(), false);
            out.push_str("</g>\n");
        }
    }
}
