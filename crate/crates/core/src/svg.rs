//! Deterministic SVG scenes of an erased region and its sample.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use crate::eraser::{ErasedRegion, Sample};
use crate::geom::{Point, Sector};

/// Rendered width in pixels; the height follows the frame's aspect ratio.
pub const PIXEL_WIDTH: f64 = 800.0;

/// Sample dot radius in pixels.
pub const DOT_RADIUS_PX: f64 = 1.5;

fn arc_to(out: &mut String, r: f64, large: bool, to: Point) {
    let _ = write!(out, " A {r} {r} 0 {} 1 {} {}", u8::from(large), to.x, to.y);
}

/// Path data for one sector in frame coordinates, angles running
/// counterclockwise from the start edge.
pub fn sector_path(sector: &Sector) -> String {
    let v = sector.vertex();
    let r = sector.radius();
    let at = |a: f64| Point::new(v.x + r * a.cos(), v.y + r * a.sin());
    let a0 = sector.start_angle();
    let span = sector.span();
    let mut d = String::new();
    if span >= TAU {
        // A single arc cannot close on itself; use two half circles.
        let p0 = at(a0);
        let _ = write!(d, "M {} {}", p0.x, p0.y);
        arc_to(&mut d, r, false, at(a0 + PI));
        arc_to(&mut d, r, false, p0);
        d.push_str(" Z");
        return d;
    }
    let p0 = at(a0);
    let _ = write!(d, "M {} {} L {} {}", v.x, v.y, p0.x, p0.y);
    if span > 0.0 {
        arc_to(&mut d, r, span > PI, at(a0 + span));
    }
    d.push_str(" Z");
    d
}

/// Full SVG 1.1 document: frame rectangle, erased sectors, sample dots.
pub fn render_svg(region: &ErasedRegion, sample: &Sample) -> String {
    let f = region.frame();
    let (w, h) = (f.width(), f.height());
    let px_h = PIXEL_WIDTH * h / w;
    let dot = DOT_RADIUS_PX * w / PIXEL_WIDTH;
    let stroke = w / PIXEL_WIDTH;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{PIXEL_WIDTH}\" height=\"{px_h}\" viewBox=\"{} {} {} {}\">",
        f.xmin, f.ymin, w, h
    );
    // Flip y so the frame reads with y pointing up.
    let _ = writeln!(s, "<g transform=\"matrix(1 0 0 -1 0 {})\">", f.ymin + f.ymax);
    let _ = writeln!(
        s,
        "<rect x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{h}\" fill=\"#f4efe1\" stroke=\"#333333\" stroke-width=\"{stroke}\"/>",
        f.xmin, f.ymin
    );
    let _ = writeln!(s, "<g fill=\"#ffffff\" stroke=\"none\">");
    for sector in region.sectors() {
        let _ = writeln!(s, "<path d=\"{}\"/>", sector_path(sector));
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, "<g fill=\"#1f4e79\">");
    for p in sample.points() {
        let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"{dot}\"/>", p.x, p.y);
    }
    s.push_str("</g>\n</g>\n</svg>\n");
    s
}

pub fn write_svg(region: &ErasedRegion, sample: &Sample, out: &Path) -> std::io::Result<()> {
    std::fs::write(out, render_svg(region, sample))
}
