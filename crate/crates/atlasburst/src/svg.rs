//! Standalone SVG 1.1 output. Coordinates are written with three decimals.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use atlasburst_core::{Geometry, Grid, NodeArc, NodeRect, RenderModel, RenderNode};
use thiserror::Error;

/// Height of the title strip above each grid cell, in pixels.
pub const TITLE_HEIGHT: u32 = 24;

/// Extents below this are drawn with a stroke so they stay visible.
const HAIRLINE: f64 = 1e-6;
const FULL_TURN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("size must be positive")]
    ZeroSize,
    #[error("grid has no cells")]
    EmptyGrid,
}

/// Three decimals, never `-0.000`.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, width: u32, height: u32) {
    let _ = write!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
}

struct Frame {
    size: f64,
}

impl Frame {
    /// Screen point at radius `r` (fraction of the outer radius) and angle
    /// `a`, clockwise from 12 o'clock.
    fn polar(&self, r: f64, a: f64) -> (String, String) {
        let c = self.size / 2.0;
        let rr = r * c;
        (num(c + rr * a.sin()), num(c - rr * a.cos()))
    }

    fn radius(&self, r: f64) -> String {
        num(r * self.size / 2.0)
    }
}

fn attrs(out: &mut String, node: &RenderNode) {
    let _ = write!(
        out,
        " fill=\"{}\" data-id=\"{}\" data-state=\"{}\" data-name=\"{}\"",
        escape(&node.fill),
        node.id,
        node.state.token(),
        escape(&node.name)
    );
}

fn close(out: &mut String, node: &RenderNode, tag: &str) {
    let _ = writeln!(out, "><title>{}</title></{tag}>", escape(&node.hover));
}

fn circle_path(f: &Frame, r: f64, sweep: u8) -> String {
    let (x0, y0) = f.polar(r, 0.0);
    let (x1, y1) = f.polar(r, PI);
    let rr = f.radius(r);
    format!("M{x0},{y0} A{rr},{rr} 0 1 {sweep} {x1},{y1} A{rr},{rr} 0 1 {sweep} {x0},{y0} Z")
}

fn arc_shape(out: &mut String, f: &Frame, arc: &NodeArc, node: &RenderNode) {
    let extent = arc.extent();
    let full = extent >= TAU - FULL_TURN_EPS;
    if full && arc.inner_radius == 0.0 {
        let c = num(f.size / 2.0);
        let _ = write!(out, "<circle cx=\"{c}\" cy=\"{c}\" r=\"{}\"", f.radius(arc.outer_radius));
        attrs(out, node);
        close(out, node, "circle");
        return;
    }
    let d = if full {
        // A full ring as two half circles per edge, hole cut by evenodd.
        format!("{} {}", circle_path(f, arc.outer_radius, 1), circle_path(f, arc.inner_radius, 0))
    } else {
        let large = u8::from(atlasburst_core::layout::is_large_arc(extent));
        let (ro, ri) = (f.radius(arc.outer_radius), f.radius(arc.inner_radius));
        let (ox0, oy0) = f.polar(arc.outer_radius, arc.start_angle);
        let (ox1, oy1) = f.polar(arc.outer_radius, arc.end_angle);
        let (ix1, iy1) = f.polar(arc.inner_radius, arc.end_angle);
        let (ix0, iy0) = f.polar(arc.inner_radius, arc.start_angle);
        if arc.inner_radius == 0.0 {
            format!("M{ix0},{iy0} L{ox0},{oy0} A{ro},{ro} 0 {large} 1 {ox1},{oy1} Z")
        } else {
            format!("M{ox0},{oy0} A{ro},{ro} 0 {large} 1 {ox1},{oy1} L{ix1},{iy1} A{ri},{ri} 0 {large} 0 {ix0},{iy0} Z")
        }
    };
    let _ = write!(out, "<path d=\"{d}\"");
    if full {
        out.push_str(" fill-rule=\"evenodd\"");
    }
    attrs(out, node);
    if extent < HAIRLINE {
        let _ = write!(out, " stroke=\"{}\" stroke-width=\"0.5\"", escape(&node.fill));
    }
    close(out, node, "path");
}

fn rect_shape(out: &mut String, f: &Frame, rect: &NodeRect, node: &RenderNode) {
    let s = f.size;
    let _ = write!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"",
        num(rect.x0 * s),
        num(rect.y0 * s),
        num((rect.x1 - rect.x0) * s),
        num((rect.y1 - rect.y0) * s)
    );
    attrs(out, node);
    if rect.x1 - rect.x0 < HAIRLINE {
        let _ = write!(out, " stroke=\"{}\" stroke-width=\"0.5\"", escape(&node.fill));
    }
    close(out, node, "rect");
}

fn diagram_body(out: &mut String, model: &RenderModel, size: u32) {
    let f = Frame { size: f64::from(size) };
    out.push_str("<g class=\"diagram\">\n");
    match &model.geometry {
        Geometry::Sunburst(arcs) => arcs.iter().zip(&model.nodes).for_each(|(a, n)| arc_shape(out, &f, a, n)),
        Geometry::Icicle(rects) => rects.iter().zip(&model.nodes).for_each(|(r, n)| rect_shape(out, &f, r, n)),
    }
    out.push_str("</g>\n");
    if !model.labels.is_empty() {
        out.push_str("<g class=\"labels\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">\n");
        for l in &model.labels {
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" data-id=\"{}\">{}</text>",
                num(l.anchor.0 * f.size),
                num(l.anchor.1 * f.size),
                l.id,
                escape(&l.text)
            );
        }
        out.push_str("</g>\n");
    }
}

/// One diagram in a `size_px` square.
pub fn render_svg(model: &RenderModel, size_px: u32) -> Result<String, SvgError> {
    if size_px == 0 {
        return Err(SvgError::ZeroSize);
    }
    let mut out = String::with_capacity(256 * model.nodes.len() + 512);
    header(&mut out, size_px, size_px);
    diagram_body(&mut out, model, size_px);
    out.push_str("</svg>\n");
    Ok(out)
}

/// All cells of a grid, each `cell_px` square under a title strip.
pub fn render_grid_svg(grid: &Grid, cell_px: u32) -> Result<String, SvgError> {
    if cell_px == 0 {
        return Err(SvgError::ZeroSize);
    }
    if grid.models.is_empty() {
        return Err(SvgError::EmptyGrid);
    }
    let cell_h = cell_px + TITLE_HEIGHT;
    let (width, height) = (grid.columns as u32 * cell_px, grid.rows as u32 * cell_h);
    let mut out = String::new();
    header(&mut out, width, height);
    for (p, model) in grid.placements.iter().zip(&grid.models) {
        let _ = writeln!(
            out,
            "<g class=\"cell\" transform=\"translate({},{})\">\n<text class=\"title\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n<g transform=\"translate(0,{TITLE_HEIGHT})\">",
            p.col as u32 * cell_px,
            p.row as u32 * cell_h,
            num(f64::from(cell_px) / 2.0),
            num(f64::from(TITLE_HEIGHT) * 0.75),
            escape(&model.title)
        );
        diagram_body(&mut out, model, cell_px);
        out.push_str("</g>\n</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
