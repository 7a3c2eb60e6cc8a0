//! SVG parsing for the restricted path subset (M/m, L/l, Q/q, T/t, C/c, Z/z).
//!
//! Lines become degenerate quadratics, cubics are approximated by recursive
//! midpoint splitting, the y axis is flipped into the internal y-up frame and
//! contours are reoriented to the nesting-parity convention.

use super::{fix_orientation, Contour, GlyphError, GlyphOutline, QuadBezier, CLOSURE_TOL};
use crate::geom::{Point, Rect};
use svgtypes::PathSegment;

/// Relative tolerance for the cubic-to-quadratic conversion: 1e-3 in
/// normalized units, scaled by the outline half-extent at parse time.
const CUBIC_TOL_NORMALIZED: f64 = 1e-3;

enum RawSeg {
    Line(Point, Point),
    Quad(Point, Point, Point),
    Cubic(Point, Point, Point, Point),
}

impl RawSeg {
    fn points(&self) -> Vec<Point> {
        match *self {
            RawSeg::Line(a, b) => vec![a, b],
            RawSeg::Quad(a, b, c) => vec![a, b, c],
            RawSeg::Cubic(a, b, c, d) => vec![a, b, c, d],
        }
    }

    fn flip_y(&mut self) {
        let flip = |p: &mut Point| p.y = -p.y;
        match self {
            RawSeg::Line(a, b) => {
                flip(a);
                flip(b);
            }
            RawSeg::Quad(a, b, c) => {
                flip(a);
                flip(b);
                flip(c);
            }
            RawSeg::Cubic(a, b, c, d) => {
                flip(a);
                flip(b);
                flip(c);
                flip(d);
            }
        }
    }
}

/// Parses an SVG document into a normalized-frame glyph outline.
///
/// The source box records the document viewBox when present (flipped into
/// the y-up frame), otherwise the outline's own bounding box; pass it to
/// [`super::normalize`] to land in [-1,1]^2.
pub fn parse_svg(bytes: &[u8]) -> Result<GlyphOutline, GlyphError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| GlyphError::Document(e.to_string()))?;
    let doc =
        roxmltree::Document::parse(text).map_err(|e| GlyphError::Document(e.to_string()))?;

    let mut subpaths: Vec<Vec<RawSeg>> = Vec::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("path")) {
        if let Some(d) = node.attribute("d") {
            parse_path_data(d, &mut subpaths)?;
        }
    }
    if subpaths.iter().all(|s| s.is_empty()) {
        return Err(GlyphError::EmptyPath);
    }

    // Internal frame is y-up; SVG is y-down.
    for sub in &mut subpaths {
        for seg in sub.iter_mut() {
            seg.flip_y();
        }
    }

    let bbox = Rect::bounding(
        subpaths
            .iter()
            .flat_map(|s| s.iter().flat_map(|seg| seg.points())),
    )
    .ok_or(GlyphError::EmptyPath)?;
    let half_extent = 0.5 * bbox.width().max(bbox.height());
    let cubic_tol = (CUBIC_TOL_NORMALIZED * half_extent).max(1e-12);

    let mut contours = Vec::new();
    for sub in subpaths {
        let mut curves = Vec::new();
        for seg in sub {
            match seg {
                RawSeg::Line(a, b) => curves.push(QuadBezier::from_line(a, b)),
                RawSeg::Quad(a, b, c) => curves.push(QuadBezier::new(a, b, c)),
                RawSeg::Cubic(a, b, c, d) => cubic_to_quads([a, b, c, d], cubic_tol, &mut curves),
            }
        }
        curves.retain(|c| !c.is_degenerate_point());
        if !curves.is_empty() {
            contours.push(Contour::new(curves));
        }
    }
    if contours.is_empty() {
        return Err(GlyphError::EmptyPath);
    }

    fix_orientation(&mut contours);

    let source_bbox = document_view_box(&doc)
        .map(|vb| {
            // flip into the y-up frame
            Rect::new(
                Point::new(vb.min.x, -vb.max.y),
                Point::new(vb.max.x, -vb.min.y),
            )
        })
        .unwrap_or(bbox);

    let outline = GlyphOutline {
        contours,
        source_bbox,
    };
    outline.validate()?;
    Ok(outline)
}

fn document_view_box(doc: &roxmltree::Document) -> Option<Rect> {
    let vb = doc.root_element().attribute("viewBox")?;
    let parts: Vec<f64> = vb
        .split([' ', ','])
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect();
    if parts.len() != 4 || parts[2] <= 0.0 || parts[3] <= 0.0 {
        return None;
    }
    Some(Rect::new(
        Point::new(parts[0], parts[1]),
        Point::new(parts[0] + parts[2], parts[1] + parts[3]),
    ))
}

fn parse_path_data(d: &str, subpaths: &mut Vec<Vec<RawSeg>>) -> Result<(), GlyphError> {
    let mut cur = Point::ZERO;
    let mut start = Point::ZERO;
    let mut open: Option<Vec<RawSeg>> = None;
    let mut last_quad_ctrl: Option<Point> = None;

    for seg in svgtypes::PathParser::from(d) {
        let seg = seg.map_err(|e| GlyphError::Document(e.to_string()))?;
        let abs = |p: Point, abs: bool| if abs { p } else { cur + p };
        match seg {
            PathSegment::MoveTo { abs: a, x, y } => {
                if let Some(segs) = open.take() {
                    // previous subpath must have been closed by Z
                    if !segs.is_empty() {
                        return Err(GlyphError::OpenContour);
                    }
                }
                cur = abs(Point::new(x, y), a);
                start = cur;
                open = Some(Vec::new());
                last_quad_ctrl = None;
            }
            PathSegment::LineTo { abs: a, x, y } => {
                let to = abs(Point::new(x, y), a);
                push_seg(&mut open, RawSeg::Line(cur, to))?;
                cur = to;
                last_quad_ctrl = None;
            }
            PathSegment::Quadratic { abs: a, x1, y1, x, y } => {
                let ctrl = abs(Point::new(x1, y1), a);
                let to = abs(Point::new(x, y), a);
                push_seg(&mut open, RawSeg::Quad(cur, ctrl, to))?;
                last_quad_ctrl = Some(ctrl);
                cur = to;
            }
            PathSegment::SmoothQuadratic { abs: a, x, y } => {
                // reflect the previous control about the current point
                let ctrl = match last_quad_ctrl {
                    Some(prev) => cur + (cur - prev),
                    None => cur,
                };
                let to = abs(Point::new(x, y), a);
                push_seg(&mut open, RawSeg::Quad(cur, ctrl, to))?;
                last_quad_ctrl = Some(ctrl);
                cur = to;
            }
            PathSegment::CurveTo {
                abs: a,
                x1,
                y1,
                x2,
                y2,
                x,
                y,
            } => {
                let c1 = abs(Point::new(x1, y1), a);
                let c2 = abs(Point::new(x2, y2), a);
                let to = abs(Point::new(x, y), a);
                push_seg(&mut open, RawSeg::Cubic(cur, c1, c2, to))?;
                cur = to;
                last_quad_ctrl = None;
            }
            PathSegment::ClosePath { .. } => {
                let mut segs = open.take().ok_or(GlyphError::OpenContour)?;
                if cur.dist(start) > CLOSURE_TOL {
                    segs.push(RawSeg::Line(cur, start));
                }
                if !segs.is_empty() {
                    subpaths.push(segs);
                }
                // a drawto right after Z starts a new subpath at the same point
                cur = start;
                open = Some(Vec::new());
                last_quad_ctrl = None;
            }
            PathSegment::HorizontalLineTo { .. } => {
                return Err(GlyphError::UnsupportedCommand('H'))
            }
            PathSegment::VerticalLineTo { .. } => {
                return Err(GlyphError::UnsupportedCommand('V'))
            }
            PathSegment::SmoothCurveTo { .. } => {
                return Err(GlyphError::UnsupportedCommand('S'))
            }
            PathSegment::EllipticalArc { .. } => {
                return Err(GlyphError::UnsupportedCommand('A'))
            }
        }
    }
    if open.is_some_and(|segs| !segs.is_empty()) {
        return Err(GlyphError::OpenContour);
    }
    Ok(())
}

fn push_seg(open: &mut Option<Vec<RawSeg>>, seg: RawSeg) -> Result<(), GlyphError> {
    open.as_mut().ok_or(GlyphError::OpenContour)?.push(seg);
    Ok(())
}

/// Splits a cubic recursively at the midpoint until the single-quadratic fit
/// (off-curve point at the intersection of the end tangents) deviates less
/// than `tol`, measured by the Bernstein hull bound.
fn cubic_to_quads(c: [Point; 4], tol: f64, out: &mut Vec<QuadBezier>) {
    fn recurse(c: [Point; 4], tol: f64, depth: u32, out: &mut Vec<QuadBezier>) {
        let quad = single_quad_fit(&c);
        if depth >= 16 || hull_deviation(&c, &quad) <= tol {
            out.push(quad);
            return;
        }
        let (left, right) = split_cubic(&c, 0.5);
        recurse(left, tol, depth + 1, out);
        recurse(right, tol, depth + 1, out);
    }
    recurse(c, tol, 0, out);
}

fn single_quad_fit(c: &[Point; 4]) -> QuadBezier {
    // midpoint formula; exact for cubics that are elevated quadratics
    let fallback = (c[1] + c[2]) * 0.75 - (c[0] + c[3]) * 0.25;

    let t0 = pick_dir(c[1] - c[0], c[2] - c[0], c[3] - c[0]);
    let t1 = pick_dir(c[3] - c[2], c[3] - c[1], c[3] - c[0]);
    let ctrl = match (t0, t1) {
        (Some(u), Some(w)) => {
            let det = u.cross(w);
            if det.abs() < 1e-12 * u.norm() * w.norm() {
                fallback
            } else {
                let s = (c[3] - c[0]).cross(w) / det;
                let p = c[0] + u * s;
                let chord = c[0].dist(c[3]).max(1e-12);
                // inflected cubics put the intersection on the wrong side or
                // far away; the fallback plus subdivision handles those
                if s < 0.0 || p.dist(c[0].midpoint(c[3])) > 10.0 * chord {
                    fallback
                } else {
                    p
                }
            }
        }
        _ => fallback,
    };
    QuadBezier::new(c[0], ctrl, c[3])
}

fn pick_dir(first: Point, second: Point, third: Point) -> Option<Point> {
    [first, second, third].into_iter().find(|&d| d.norm() > 1e-12)
}

/// Upper bound of max_t |cubic(t) - quad(t)|: elevate the quadratic to a
/// cubic and take the largest control-point difference (convex hull bound).
fn hull_deviation(c: &[Point; 4], q: &QuadBezier) -> f64 {
    let e0 = q.p0;
    let e1 = (q.p0 + q.p1 * 2.0) / 3.0;
    let e2 = (q.p1 * 2.0 + q.p2) / 3.0;
    let e3 = q.p2;
    (c[0] - e0)
        .norm()
        .max((c[1] - e1).norm())
        .max((c[2] - e2).norm())
        .max((c[3] - e3).norm())
}

fn split_cubic(c: &[Point; 4], t: f64) -> ([Point; 4], [Point; 4]) {
    let ab = c[0].lerp(c[1], t);
    let bc = c[1].lerp(c[2], t);
    let cd = c[2].lerp(c[3], t);
    let abc = ab.lerp(bc, t);
    let bcd = bc.lerp(cd, t);
    let mid = abc.lerp(bcd, t);
    ([c[0], ab, abc, mid], [mid, bcd, cd, c[3]])
}
