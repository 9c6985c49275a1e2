//! Static SVG figures of domains.
//!
//! Output is a pure function of its inputs: coordinates are printed with a
//! fixed number of decimals and elements are emitted in input order.

use std::fmt::Write;

use crate::curvegeo::{CharKind, CharPoint};
use crate::domain::{clip_line, Domain};
use crate::error::{Error, Result};
use crate::geom::{Axis, Box2, Point};
use crate::oracle::grid_mask;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderStyle {
    /// Longer side of the canvas in pixels.
    pub canvas: f64,
    pub boundary_width: f64,
    pub disk_width: f64,
    pub marker_radius: f64,
    pub fill: String,
    pub line_dash: String,
    /// Raster rows used for the region fill.
    pub fill_resolution: usize,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            canvas: 600.0,
            boundary_width: 1.5,
            disk_width: 1.0,
            marker_radius: 4.0,
            fill: "#b8b8b8".into(),
            line_dash: "4 3".into(),
            fill_resolution: 300,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<()> {
        let dims = [self.canvas, self.boundary_width, self.disk_width, self.marker_radius];
        if dims.iter().any(|d| !(*d > 0.0)) || self.fill_resolution == 0 {
            return Err(Error::InvalidInput("render dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Extra geometry drawn on top of the domain.
#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub points: Vec<CharPoint>,
    /// Inserted disks, outlined.
    pub disks: Vec<(Point, f64)>,
    /// Tangent and bitangent lines as point and direction; clipped to the box.
    pub lines: Vec<(Point, Point)>,
}

fn marker_color(kind: CharKind) -> &'static str {
    match kind {
        CharKind::Crossing => "#000000",
        CharKind::Pole(Axis::X) => "#1f5fbf",
        CharKind::Pole(Axis::Y) => "#1f9f8f",
        CharKind::Inflection => "#d02020",
        CharKind::BitangentContact => "#e08000",
        CharKind::CurvatureVertex => "#8030b0",
    }
}

struct Frame {
    bbox: Box2,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(bbox: Box2, canvas: f64) -> Self {
        let scale = canvas / bbox.width().max(bbox.height());
        Frame { bbox, scale, width: bbox.width() * scale, height: bbox.height() * scale }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        ((p.x - self.bbox.x_lo) * self.scale, (self.bbox.y_hi - p.y) * self.scale)
    }
}

pub fn render_svg(domain: &Domain, style: &RenderStyle, overlay: &Overlay) -> Result<String> {
    style.validate()?;
    let bbox = domain.scene.bbox;
    let fr = Frame::new(bbox, style.canvas);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        fr.width.ceil(),
        fr.height.ceil(),
        fr.width,
        fr.height
    )
    .unwrap();
    writeln!(s, r##"<rect x="0" y="0" width="{:.3}" height="{:.3}" fill="#ffffff"/>"##, fr.width, fr.height).unwrap();

    // Region fill: one rectangle per horizontal run of inside cells.
    let mask = grid_mask(&domain.scene, style.fill_resolution);
    let (hx, hy) = mask.cell();
    writeln!(s, r#"<g fill="{}" stroke="none">"#, style.fill).unwrap();
    for iy in 0..mask.resolution {
        let mut ix = 0;
        while ix < mask.resolution {
            if !mask.get(ix, iy) {
                ix += 1;
                continue;
            }
            let start = ix;
            while ix < mask.resolution && mask.get(ix, iy) {
                ix += 1;
            }
            let lo = Point::new(bbox.x_lo + start as f64 * hx, bbox.y_lo + (iy + 1) as f64 * hy);
            let (x, y) = fr.map(lo);
            writeln!(
                s,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}"/>"#,
                (ix - start) as f64 * hx * fr.scale,
                hy * fr.scale
            )
            .unwrap();
        }
    }
    s.push_str("</g>\n");

    writeln!(s, r##"<g fill="none" stroke="#000000" stroke-width="{}">"##, style.boundary_width).unwrap();
    for arc in &domain.boundary_arcs {
        let pts: Vec<String> = arc
            .points
            .iter()
            .map(|&p| {
                let (x, y) = fr.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let tag = if arc.closed { "polygon" } else { "polyline" };
        writeln!(s, r#"<{tag} points="{}"/>"#, pts.join(" ")).unwrap();
    }
    s.push_str("</g>\n");

    if !overlay.disks.is_empty() {
        writeln!(s, r##"<g fill="none" stroke="#2060d0" stroke-width="{}">"##, style.disk_width).unwrap();
        for &(c, r) in &overlay.disks {
            let (x, y) = fr.map(c);
            writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#, r * fr.scale).unwrap();
        }
        s.push_str("</g>\n");
    }
    if !overlay.lines.is_empty() {
        writeln!(s, r##"<g stroke="#606060" stroke-width="1" stroke-dasharray="{}">"##, style.line_dash).unwrap();
        for &(p, d) in &overlay.lines {
            if let Some((a, b)) = clip_line(&bbox, p, d) {
                let ((x1, y1), (x2, y2)) = (fr.map(a), fr.map(b));
                writeln!(s, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
            }
        }
        s.push_str("</g>\n");
    }
    for cp in &overlay.points {
        let (x, y) = fr.map(cp.location);
        writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{}" fill="{}"/>"#,
            style.marker_radius,
            marker_color(cp.kind)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Scene};
    use crate::poly::Poly2;

    fn disk() -> Domain {
        let scene = Scene::new(vec![Poly2::circle(Point::new(0.0, 0.0), 1.0)], Box2::centered(1.5), Point::new(0.0, 0.0));
        build_domain(&scene).unwrap()
    }

    #[test]
    fn deterministic_and_well_formed() {
        let d = disk();
        let overlay = Overlay {
            points: d.characteristic_set(Axis::X),
            disks: vec![(Point::new(0.5, 0.5), 0.1)],
            lines: vec![(Point::new(0.0, 1.0), Point::new(1.0, 0.0))],
        };
        let a = render_svg(&d, &RenderStyle::default(), &overlay).unwrap();
        let b = render_svg(&d, &RenderStyle::default(), &overlay).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<line").count(), 1);
        assert_eq!(a.matches("fill=\"#1f5fbf\"").count(), 2);
    }

    #[test]
    fn bad_style() {
        let style = RenderStyle { canvas: 0.0, ..RenderStyle::default() };
        assert!(render_svg(&disk(), &style, &Overlay::default()).is_err());
    }
}
