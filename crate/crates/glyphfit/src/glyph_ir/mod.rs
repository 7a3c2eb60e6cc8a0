//! Glyph intermediate representation: closed quadratic-Bezier contours in a
//! y-up frame, normalized to [-1,1]^2, with consistent orientation (interior
//! on the left of travel; outer contours counterclockwise, holes clockwise).

mod parse;
mod write;

pub use parse::parse_svg;
pub use write::{path_data, write_svg};

use crate::geom::{Point, Rect};
use crate::roots::solve_quadratic;
use thiserror::Error;

/// Closure / degeneracy tolerance for outline invariants.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GlyphError {
    #[error("unsupported path command '{0}'")]
    UnsupportedCommand(char),
    #[error("open contour: subpath is not closed with Z")]
    OpenContour,
    #[error("no drawable path data")]
    EmptyPath,
    #[error("degenerate em box")]
    DegenerateBox,
    #[error("malformed SVG document: {0}")]
    Document(String),
}

/// One quadratic Bezier segment: on-curve endpoints `p0`, `p2` and the
/// off-curve control point `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadBezier {
    pub p0: Point,
    pub p1: Point,
    pub p2: Point,
}

impl QuadBezier {
    pub fn new(p0: Point, p1: Point, p2: Point) -> Self {
        QuadBezier { p0, p1, p2 }
    }

    /// A straight segment as a degenerate quadratic (control point at the
    /// chord midpoint).
    pub fn from_line(a: Point, b: Point) -> Self {
        QuadBezier::new(a, a.midpoint(b), b)
    }

    pub fn eval(&self, t: f64) -> Point {
        let s = 1.0 - t;
        self.p0 * (s * s) + self.p1 * (2.0 * s * t) + self.p2 * (t * t)
    }

    /// First derivative with respect to t.
    pub fn deriv(&self, t: f64) -> Point {
        (self.p1 - self.p0) * (2.0 * (1.0 - t)) + (self.p2 - self.p1) * (2.0 * t)
    }

    pub fn reversed(&self) -> Self {
        QuadBezier::new(self.p2, self.p1, self.p0)
    }

    /// True when all control points coincide within `CLOSURE_TOL`.
    pub fn is_degenerate_point(&self) -> bool {
        self.p0.dist(self.p1) < CLOSURE_TOL
            && self.p1.dist(self.p2) < CLOSURE_TOL
            && self.p0.dist(self.p2) < CLOSURE_TOL
    }

    /// Contribution of this segment to the contour's signed area
    /// (Green's theorem, 1/2 * integral of x dy - y dx).
    pub fn signed_area_term(&self) -> f64 {
        let a = self.p0 - self.p1 * 2.0 + self.p2;
        let b = (self.p1 - self.p0) * 2.0;
        let c = self.p0;
        0.5 * (-a.cross(b) / 3.0 + c.cross(a) + c.cross(b))
    }

    /// Winding contribution of a horizontal ray from `q` toward +x:
    /// +1 per upward crossing, -1 per downward crossing.
    pub fn winding_contrib(&self, q: Point) -> i32 {
        // Split into y-monotone pieces at the single extremum of y(t).
        let ay = self.p0.y - 2.0 * self.p1.y + self.p2.y;
        let by = self.p1.y - self.p0.y; // dy/dt = 2 (ay t + by)
        let mut cuts = [0.0, 1.0, 1.0];
        let mut n = 2;
        if ay.abs() > 1e-300 {
            let t_ext = -by / ay;
            if t_ext > 0.0 && t_ext < 1.0 {
                cuts = [0.0, t_ext, 1.0];
                n = 3;
            }
        }
        let mut w = 0;
        for piece in cuts[..n].windows(2) {
            let (ta, tb) = (piece[0], piece[1]);
            let ya = self.eval(ta).y;
            let yb = self.eval(tb).y;
            let (lo, hi, dir) = if yb > ya {
                (ya, yb, 1)
            } else if yb < ya {
                (yb, ya, -1)
            } else {
                continue;
            };
            // Half-open range so shared junction heights count exactly once.
            if !(lo <= q.y && q.y < hi) {
                continue;
            }
            let t = self.solve_y_monotone(q.y, ta, tb);
            if self.eval(t).x > q.x {
                w += dir;
            }
        }
        w
    }

    /// Root of y(t) = target on a y-monotone piece [ta, tb].
    fn solve_y_monotone(&self, target: f64, ta: f64, tb: f64) -> f64 {
        let a = self.p0.y - 2.0 * self.p1.y + self.p2.y;
        let b = 2.0 * (self.p1.y - self.p0.y);
        let c = self.p0.y - target;
        for r in solve_quadratic(a, b, c) {
            if r >= ta - 1e-9 && r <= tb + 1e-9 {
                return r.clamp(ta, tb);
            }
        }
        // Monotone piece: fall back to bisection.
        let (mut lo, mut hi) = (ta, tb);
        let rising = self.eval(tb).y > self.eval(ta).y;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if (self.eval(mid).y > target) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A closed loop of quadratic Bezier segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Contour {
    pub curves: Vec<QuadBezier>,
}

impl Contour {
    pub fn new(curves: Vec<QuadBezier>) -> Self {
        Contour { curves }
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        !self.curves.is_empty()
            && self
                .curves
                .iter()
                .zip(self.curves.iter().cycle().skip(1))
                .all(|(a, b)| a.p2.dist(b.p0) <= tol)
    }

    /// Positive for counterclockwise traversal in the y-up frame.
    pub fn signed_area(&self) -> f64 {
        self.curves.iter().map(|c| c.signed_area_term()).sum()
    }

    pub fn reverse(&mut self) {
        self.curves.reverse();
        for c in &mut self.curves {
            *c = c.reversed();
        }
    }

    pub fn winding_number(&self, q: Point) -> i32 {
        self.curves.iter().map(|c| c.winding_contrib(q)).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.curves.iter().flat_map(|c| [c.p0, c.p1, c.p2])
    }
}

/// A complete glyph: one or more contours plus the box the coordinates were
/// normalized from (kept for denormalization).
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphOutline {
    pub contours: Vec<Contour>,
    pub source_bbox: Rect,
}

impl GlyphOutline {
    /// Winding number of the full outline (nonzero fill rule: != 0 is inside).
    pub fn winding_number(&self, q: Point) -> i32 {
        self.contours.iter().map(|c| c.winding_number(q)).sum()
    }

    pub fn curves(&self) -> impl Iterator<Item = &QuadBezier> {
        self.contours.iter().flat_map(|c| c.curves.iter())
    }

    pub fn bounding_box(&self) -> Option<Rect> {
        Rect::bounding(self.contours.iter().flat_map(|c| c.points()))
    }

    /// Checks the structural invariants: at least one closed contour, finite
    /// non-degenerate curves, consistent orientation.
    pub fn validate(&self) -> Result<(), GlyphError> {
        if self.contours.is_empty() {
            return Err(GlyphError::EmptyPath);
        }
        for contour in &self.contours {
            if !contour.is_closed(CLOSURE_TOL) {
                return Err(GlyphError::OpenContour);
            }
            for c in &contour.curves {
                if !(c.p0.is_finite() && c.p1.is_finite() && c.p2.is_finite())
                    || c.is_degenerate_point()
                {
                    return Err(GlyphError::EmptyPath);
                }
            }
        }
        Ok(())
    }
}

/// Maps `em_box` onto [-1,1]^2 with a uniform scale (aspect preserved,
/// centered on the shorter axis) and records it as the source box.
pub fn normalize(outline: &GlyphOutline, em_box: Rect) -> Result<GlyphOutline, GlyphError> {
    if !(em_box.width() > 0.0 && em_box.height() > 0.0) {
        return Err(GlyphError::DegenerateBox);
    }
    let scale = 2.0 / em_box.width().max(em_box.height());
    let center = em_box.center();
    let map = |p: Point| (p - center) * scale;
    let contours = outline
        .contours
        .iter()
        .map(|contour| {
            Contour::new(
                contour
                    .curves
                    .iter()
                    .map(|c| QuadBezier::new(map(c.p0), map(c.p1), map(c.p2)))
                    .collect(),
            )
        })
        .collect();
    Ok(GlyphOutline {
        contours,
        source_bbox: em_box,
    })
}

/// Reorients contours so nesting parity matches the orientation invariant:
/// even nesting depth (outer) => positive signed area, odd (hole) => negative.
pub(crate) fn fix_orientation(contours: &mut [Contour]) {
    let probes: Vec<Point> = contours
        .iter()
        .map(|c| c.curves[0].eval(0.5))
        .collect();
    for i in 0..contours.len() {
        let depth = contours
            .iter()
            .enumerate()
            .filter(|(j, other)| *j != i && other.winding_number(probes[i]) != 0)
            .count();
        let want_positive = depth % 2 == 0;
        if (contours[i].signed_area() > 0.0) != want_positive {
            contours[i].reverse();
        }
    }
}
