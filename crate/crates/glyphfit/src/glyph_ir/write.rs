//! SVG output: contours in the normalized y-up frame are denormalized onto a
//! square pixel canvas (y flipped back) and emitted as M/Q/Z path data with
//! 6-decimal fixed formatting.

use super::Contour;
use crate::geom::Point;
use std::fmt::Write as _;

/// Path data (M/Q/Z only) for contours denormalized onto a canvas_px square
/// with the y axis flipped back to SVG's y-down convention.
pub fn path_data(contours: &[Contour], canvas_px: u32) -> String {
    let c = canvas_px as f64;
    let to_px = |p: Point| Point::new((p.x + 1.0) * 0.5 * c, (1.0 - p.y) * 0.5 * c);

    let mut d = String::new();
    for contour in contours {
        if contour.curves.is_empty() {
            continue;
        }
        let start = to_px(contour.curves[0].p0);
        let _ = write!(d, "M {:.6} {:.6} ", start.x, start.y);
        for curve in &contour.curves {
            let p1 = to_px(curve.p1);
            let p2 = to_px(curve.p2);
            let _ = write!(d, "Q {:.6} {:.6} {:.6} {:.6} ", p1.x, p1.y, p2.x, p2.y);
        }
        d.push_str("Z ");
    }
    d.trim_end().to_string()
}

/// Renders contours as a complete SVG document. All contours share a single
/// path element so the nonzero fill rule carves holes correctly.
pub fn write_svg(contours: &[Contour], canvas_px: u32) -> String {
    let d = path_data(contours, canvas_px);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{canvas_px}\" height=\"{canvas_px}\" \
         viewBox=\"0 0 {canvas_px} {canvas_px}\">\n  <path d=\"{d}\" fill-rule=\"nonzero\"/>\n</svg>\n"
    )
}
