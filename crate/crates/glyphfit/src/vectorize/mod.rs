//! From a fitted field to quadratic-Bezier outlines: clip every primitive
//! against the [-1,1]^2 canvas curve by curve, convert the parabola arcs of
//! the surviving boundary to quadratic Beziers (the conversion is exact:
//! a parabola arc *is* a quadratic Bezier), and merge the primitive
//! outlines into one consistently oriented set of contours.

mod clip;
mod curve_geom;
mod merge;

pub use clip::clip_primitive;
pub use merge::merge_outlines;

use crate::geom::Point;
use crate::glyph_ir::{Contour, QuadBezier};
use crate::pseudo_field::{Field, ParabolicCurve};
use curve_geom::ParabolaGeom;
use thiserror::Error;

/// Keep/drop classification tolerance for midpoint membership tests.
pub(crate) const EPS_KEEP: f64 = 1e-7;

/// Segments shorter than this are discarded before stitching.
pub(crate) const MIN_SEG_LEN: f64 = 1e-6;

/// Endpoint matching tolerance while stitching loops.
pub(crate) const STITCH_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("degenerate arc: end tangents are parallel (start == end)")]
    ParallelTangents,
    #[error("non-manifold boundary while clipping: {0}")]
    NonManifoldBoundary(String),
    #[error("open chain left after merging: {0}")]
    StitchFailure(String),
}

/// A piece of a parabola's zero set between two points on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaArc {
    pub curve: ParabolicCurve,
    pub start: Point,
    pub end: Point,
}

/// One directed boundary piece; the region interior lies on its left.
#[derive(Debug, Clone)]
pub struct BoundarySeg {
    pub kind: SegKind,
    /// Start point (cached; intersections are shared between the segments
    /// they split so junctions match exactly).
    pub a: Point,
    pub b: Point,
    /// Generating curve for pieces of a zero set; None for canvas edges.
    pub source: Option<ParabolicCurve>,
}

#[derive(Debug, Clone)]
pub enum SegKind {
    Straight,
    Arc { geom: ParabolaGeom, u0: f64, u1: f64 },
}

impl BoundarySeg {
    pub(crate) fn straight(a: Point, b: Point, source: Option<ParabolicCurve>) -> Self {
        BoundarySeg {
            kind: SegKind::Straight,
            a,
            b,
            source,
        }
    }

    pub(crate) fn arc(geom: ParabolaGeom, u0: f64, u1: f64, a: Point, b: Point) -> Self {
        BoundarySeg {
            kind: SegKind::Arc { geom, u0, u1 },
            a,
            b,
            source: Some(geom.curve),
        }
    }

    pub fn midpoint(&self) -> Point {
        match &self.kind {
            SegKind::Straight => self.a.midpoint(self.b),
            SegKind::Arc { geom, u0, u1 } => geom.point(0.5 * (u0 + u1)),
        }
    }

    /// Tangent at the midpoint, in travel direction.
    pub fn mid_tangent(&self) -> Point {
        match &self.kind {
            SegKind::Straight => self.b - self.a,
            SegKind::Arc { geom, u0, u1 } => {
                let t = geom.tangent(0.5 * (u0 + u1));
                if u1 >= u0 {
                    t
                } else {
                    -t
                }
            }
        }
    }

    /// Coarse size measure: chord plus the midpoint's sagitta. Keeps thin
    /// hairpin arcs from being culled as "short".
    pub fn approx_len(&self) -> f64 {
        let chord = self.a.dist(self.b);
        match &self.kind {
            SegKind::Straight => chord,
            SegKind::Arc { .. } => chord + 2.0 * self.midpoint().dist(self.a.midpoint(self.b)),
        }
    }

    pub fn as_parabola_arc(&self) -> Option<ParabolaArc> {
        match &self.kind {
            SegKind::Arc { geom, .. } => Some(ParabolaArc {
                curve: geom.curve,
                start: self.a,
                end: self.b,
            }),
            SegKind::Straight => None,
        }
    }

    /// Splits at interior points given as (own-parameter, point) records,
    /// preserving travel order and reusing the record points verbatim.
    pub(crate) fn split_at(&self, mut cuts: Vec<(f64, Point)>) -> Vec<BoundarySeg> {
        if cuts.is_empty() {
            return vec![self.clone()];
        }
        match &self.kind {
            SegKind::Straight => {
                cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                let mut out = Vec::with_capacity(cuts.len() + 1);
                let mut prev = self.a;
                for (_, p) in &cuts {
                    out.push(BoundarySeg::straight(prev, *p, self.source));
                    prev = *p;
                }
                out.push(BoundarySeg::straight(prev, self.b, self.source));
                out
            }
            SegKind::Arc { geom, u0, u1 } => {
                let ascending = u1 >= u0;
                cuts.sort_by(|x, y| {
                    if ascending {
                        x.0.partial_cmp(&y.0).unwrap()
                    } else {
                        y.0.partial_cmp(&x.0).unwrap()
                    }
                });
                let mut out = Vec::with_capacity(cuts.len() + 1);
                let mut prev_u = *u0;
                let mut prev_p = self.a;
                for (u, p) in &cuts {
                    out.push(BoundarySeg::arc(*geom, prev_u, *u, prev_p, *p));
                    prev_u = *u;
                    prev_p = *p;
                }
                out.push(BoundarySeg::arc(*geom, prev_u, *u1, prev_p, self.b));
                out
            }
        }
    }

    /// Moves an endpoint onto `target` (start or end). Arc endpoints are
    /// re-projected through the graph parameter so they stay exactly on
    /// the parabola.
    pub(crate) fn snap_endpoint(&mut self, start: bool, target: Point) {
        match &mut self.kind {
            SegKind::Straight => {
                if start {
                    self.a = target;
                } else {
                    self.b = target;
                }
            }
            SegKind::Arc { geom, u0, u1 } => {
                let u = geom.param_of(target);
                let p = geom.point(u);
                if start {
                    *u0 = u;
                    self.a = p;
                } else {
                    *u1 = u;
                    self.b = p;
                }
            }
        }
    }
}

/// Clipped outline of one primitive: closed loops of boundary pieces, each
/// loop directed with the primitive interior on the left.
#[derive(Debug, Clone, Default)]
pub struct PrimitiveOutline {
    pub loops: Vec<Vec<BoundarySeg>>,
}

impl PrimitiveOutline {
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }
}

/// Per-contour, per-curve provenance: the generating parabola of each
/// emitted Bezier, None for canvas-edge pieces.
pub type CurveSources = Vec<Vec<Option<ParabolicCurve>>>;

/// Vectorization output: per-primitive outlines, the merged union as
/// quadratic-Bezier contours, and per-curve provenance.
#[derive(Debug, Clone, Default)]
pub struct VectorResult {
    pub primitive_outlines: Vec<PrimitiveOutline>,
    pub merged: Vec<Contour>,
    pub merged_sources: CurveSources,
}

/// Converts a parabola arc to quadratic Beziers (usually one; up to four
/// when the control point lands far outside the chord and the arc is split
/// at the apex).
pub fn arc_to_bezier(arc: &ParabolaArc) -> Result<Vec<QuadBezier>, VectorizeError> {
    if arc.start.dist(arc.end) < 1e-12 {
        return Err(VectorizeError::ParallelTangents);
    }
    match ParabolaGeom::from_curve(&arc.curve) {
        Some(geom) => {
            let u0 = geom.param_of(arc.start);
            let u1 = geom.param_of(arc.end);
            if (u1 - u0).abs() < 1e-15 {
                return Err(VectorizeError::ParallelTangents);
            }
            Ok(arc_pieces(&geom, u0, u1, arc.start, arc.end))
        }
        // degenerate zero set: the piece is straight
        None => Ok(vec![QuadBezier::from_line(arc.start, arc.end)]),
    }
}

/// Exact conversion with cached endpoints: p1 sits at the intersection of
/// the end tangents, computed as p0 + P'(u0) * (u1 - u0) / 2 (the quadratic
/// reparametrization of the graph).
pub(crate) fn arc_pieces(
    geom: &ParabolaGeom,
    u0: f64,
    u1: f64,
    a: Point,
    b: Point,
) -> Vec<QuadBezier> {
    fn convert(
        geom: &ParabolaGeom,
        u0: f64,
        u1: f64,
        a: Point,
        b: Point,
        depth: u32,
        out: &mut Vec<QuadBezier>,
    ) {
        let ctrl = a + geom.tangent(u0) * (0.5 * (u1 - u0));
        let chord = a.dist(b);
        if depth < 2 && ctrl.dist(a.midpoint(b)) > 10.0 * chord {
            // split at the apex when it lies inside, else halve the span
            let apex = geom.apex_u().filter(|&ua| {
                let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
                ua > lo + 1e-12 && ua < hi - 1e-12
            });
            let um = apex.unwrap_or(0.5 * (u0 + u1));
            let pm = geom.point(um);
            convert(geom, u0, um, a, pm, depth + 1, out);
            convert(geom, um, u1, pm, b, depth + 1, out);
            return;
        }
        out.push(QuadBezier::new(a, ctrl, b));
    }
    let mut out = Vec::new();
    convert(geom, u0, u1, a, b, 0, &mut out);
    out
}

/// Stitches a segment soup into closed loops by endpoint matching.
///
/// Junction points are exact in the common case (intersection records are
/// shared), so matching is effectively nearest-point with a `tol` safety
/// net for culled micro-segments; matched junctions are then snapped so
/// emitted contours close exactly.
pub(crate) fn stitch_loops(
    segs: Vec<BoundarySeg>,
    tol: f64,
) -> Result<Vec<Vec<BoundarySeg>>, String> {
    let segs: Vec<BoundarySeg> = segs
        .into_iter()
        .filter(|s| s.approx_len() >= MIN_SEG_LEN)
        .collect();
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();

    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut chain = vec![segs[start].clone()];
        loop {
            let cur_end = chain.last().unwrap().b;
            let home = chain[0].a;
            if chain.len() >= 2 && cur_end.dist(home) <= tol {
                break; // closed
            }
            // nearest unused continuation; lowest index wins ties
            let mut best: Option<(usize, f64)> = None;
            for (i, seg) in segs.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = seg.a.dist(cur_end);
                if d <= tol && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            match best {
                Some((i, _)) => {
                    used[i] = true;
                    chain.push(segs[i].clone());
                }
                None => {
                    return Err(format!(
                        "chain of {} segments ends at ({:.6}, {:.6}) with no continuation \
                         (loop started at ({:.6}, {:.6}), {} segments unused)",
                        chain.len(),
                        cur_end.x,
                        cur_end.y,
                        home.x,
                        home.y,
                        used.iter().filter(|u| !**u).count()
                    ));
                }
            }
        }
        // snap junctions so downstream closure is exact
        let n = chain.len();
        for i in 0..n {
            let j = (i + 1) % n;
            let (pa, pb) = (chain[i].b, chain[j].a);
            if pa != pb {
                let target = pa.midpoint(pb);
                chain[i].snap_endpoint(false, target);
                let t2 = chain[i].b;
                chain[j].snap_endpoint(true, t2);
            }
        }
        loops.push(chain);
    }
    Ok(loops)
}

/// Converts stitched loops to quadratic-Bezier contours, tracking the
/// generating parabola of every emitted curve.
pub(crate) fn loops_to_contours(loops: &[Vec<BoundarySeg>]) -> (Vec<Contour>, CurveSources) {
    let mut contours = Vec::new();
    let mut sources = Vec::new();
    for lp in loops {
        let mut curves = Vec::new();
        let mut curve_sources = Vec::new();
        for seg in lp {
            match &seg.kind {
                SegKind::Straight => {
                    curves.push(QuadBezier::from_line(seg.a, seg.b));
                    curve_sources.push(seg.source);
                }
                SegKind::Arc { geom, u0, u1 } => {
                    for qb in arc_pieces(geom, *u0, *u1, seg.a, seg.b) {
                        curves.push(qb);
                        curve_sources.push(seg.source);
                    }
                }
            }
        }
        if !curves.is_empty() {
            contours.push(Contour::new(curves));
            sources.push(curve_sources);
        }
    }
    (contours, sources)
}

/// Full post-processing: clip every primitive, drop empty ones, merge into
/// a single outline.
pub fn vectorize(field: &Field) -> Result<VectorResult, VectorizeError> {
    let field = field.normalized();
    let mut primitive_outlines = Vec::new();
    let mut kept: Vec<(usize, PrimitiveOutline)> = Vec::new();
    for (i, curves) in field.primitives().iter().enumerate() {
        let outline = clip_primitive(curves)?;
        if !outline.is_empty() {
            kept.push((i, outline.clone()));
        }
        primitive_outlines.push(outline);
    }
    let (merged, merged_sources) = merge_outlines(&kept, &field)?;
    Ok(VectorResult {
        primitive_outlines,
        merged,
        merged_sources,
    })
}
