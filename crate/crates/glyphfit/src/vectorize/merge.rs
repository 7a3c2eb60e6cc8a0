//! Boolean union of clipped primitive outlines.
//!
//! Every boundary piece is split at its intersections with the other
//! primitives' boundaries, kept only where it borders the union (outside
//! every other primitive, with an orientation tie-break for coincident
//! boundaries), and the survivors are stitched back into closed contours.

use super::curve_geom::{curve_arc_roots, curve_line_roots};
use super::{
    loops_to_contours, stitch_loops, BoundarySeg, CurveSources, PrimitiveOutline, SegKind,
    VectorizeError, EPS_KEEP, STITCH_TOL,
};
use crate::geom::Point;
use crate::glyph_ir::Contour;
use crate::pseudo_field::{eval_primitive, Field};

/// Merges clipped primitive outlines (tagged with their primitive index in
/// `field`) into the union's quadratic-Bezier contours, oriented with the
/// glyph interior on the left. Also returns the per-curve provenance.
pub fn merge_outlines(
    outlines: &[(usize, PrimitiveOutline)],
    field: &Field,
) -> Result<(Vec<Contour>, CurveSources), VectorizeError> {
    let mut soup: Vec<(usize, BoundarySeg)> = Vec::new();
    for (prim, outline) in outlines {
        for lp in &outline.loops {
            for seg in lp {
                soup.push((*prim, seg.clone()));
            }
        }
    }
    if soup.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }

    // cut lists per segment, in the segment's own parameter
    let mut cuts: Vec<Vec<(f64, Point)>> = vec![Vec::new(); soup.len()];
    for i in 0..soup.len() {
        for j in (i + 1)..soup.len() {
            if soup[i].0 == soup[j].0 {
                continue; // same primitive: segments only meet at junctions
            }
            let (si, sj) = (&soup[i].1, &soup[j].1);
            for (ti, tj, p) in seg_seg_intersections(si, sj) {
                cuts[i].push((ti, p));
                cuts[j].push((tj, p));
            }
        }
    }

    let mut kept: Vec<BoundarySeg> = Vec::new();
    for (idx, (prim, seg)) in soup.iter().enumerate() {
        let interior = interior_cuts(seg, &cuts[idx]);
        for piece in seg.split_at(interior) {
            if keep_piece(*prim, &piece, field) {
                kept.push(piece);
            }
        }
    }

    let loops = stitch_loops(kept, STITCH_TOL).map_err(VectorizeError::StitchFailure)?;
    Ok(loops_to_contours(&loops))
}

/// Filters raw cut records down to deduplicated, strictly interior ones.
fn interior_cuts(seg: &BoundarySeg, raw: &[(f64, Point)]) -> Vec<(f64, Point)> {
    let (t0, t1) = match &seg.kind {
        SegKind::Straight => (0.0, 1.0),
        SegKind::Arc { u0, u1, .. } => (*u0, *u1),
    };
    let span = (t1 - t0).abs().max(1e-12);
    let mut list: Vec<(f64, Point)> = raw
        .iter()
        .copied()
        .filter(|(t, _)| (t - t0).abs() > 1e-9 * span && (t - t1).abs() > 1e-9 * span)
        .collect();
    list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, Point)> = Vec::new();
    for (t, p) in list {
        match out.last() {
            Some((lt, _)) if (t - lt).abs() <= 1e-9 * span => {}
            _ => out.push((t, p)),
        }
    }
    out
}

/// Geometric intersections of two boundary segments, as
/// (param on a, param on b, shared point).
fn seg_seg_intersections(a: &BoundarySeg, b: &BoundarySeg) -> Vec<(f64, f64, Point)> {
    // candidates along `a`, using b's implicit form
    let candidates: Vec<(f64, Point)> = match (&a.kind, &b.kind) {
        (SegKind::Straight, SegKind::Straight) => {
            line_line(a.a, a.b, b.a, b.b).into_iter().collect()
        }
        (SegKind::Straight, SegKind::Arc { .. }) => {
            let curve = b.source.expect("arc has a source");
            curve_line_roots(&curve, a.a, a.b)
                .into_iter()
                .map(|s| (s, a.a.lerp(a.b, s)))
                .collect()
        }
        (SegKind::Arc { geom, u0, u1 }, SegKind::Straight) => {
            // roots of b's line equation along a's graph parametrization
            let delta = b.b - b.a;
            let n = delta.perp();
            let c0 = n.dot(b.a);
            // n . point(u) - c0 is quadratic in u
            let (va, vb, vc) = geom.v_coeffs();
            let n1 = n.dot(geom.e1);
            let n2 = n.dot(geom.e2);
            let qa = n2 * va;
            let qb = n1 + n2 * vb;
            let qc = n2 * vc - c0;
            let (lo, hi) = if u0 <= u1 { (*u0, *u1) } else { (*u1, *u0) };
            crate::roots::solve_quadratic(qa, qb, qc)
                .into_iter()
                .filter(|u| *u >= lo - 1e-9 && *u <= hi + 1e-9)
                .map(|u| (u, geom.point(u)))
                .collect()
        }
        (SegKind::Arc { geom, u0, u1 }, SegKind::Arc { .. }) => {
            let curve = b.source.expect("arc has a source");
            let (lo, hi) = if u0 <= u1 { (*u0, *u1) } else { (*u1, *u0) };
            let span = (hi - lo).max(1e-12);
            curve_arc_roots(&curve, geom)
                .into_iter()
                .filter(|u| *u >= lo - 1e-9 * span && *u <= hi + 1e-9 * span)
                .map(|u| (u, geom.point(u)))
                .collect()
        }
    };

    // keep candidates that actually lie on b, and find their b-parameter
    let mut out = Vec::new();
    for (ta, p) in candidates {
        if !param_in_seg(a, ta) {
            continue;
        }
        let tb = match &b.kind {
            SegKind::Straight => {
                let delta = b.b - b.a;
                let len2 = delta.norm_sq();
                if len2 < 1e-300 {
                    continue;
                }
                (p - b.a).dot(delta) / len2
            }
            SegKind::Arc { geom, .. } => geom.param_of(p),
        };
        if !param_in_seg(b, tb) {
            continue;
        }
        // for arcs the zero set equals the graph, so a root with an
        // in-range parameter is on the segment; verify distance anyway to
        // reject projections of far-away points
        let pb = match &b.kind {
            SegKind::Straight => b.a.lerp(b.b, tb),
            SegKind::Arc { geom, .. } => geom.point(tb),
        };
        if pb.dist(p) > 1e-7 {
            continue;
        }
        out.push((ta, tb, p));
    }
    out
}

fn param_in_seg(seg: &BoundarySeg, t: f64) -> bool {
    let (t0, t1) = match &seg.kind {
        SegKind::Straight => (0.0, 1.0),
        SegKind::Arc { u0, u1, .. } => (*u0, *u1),
    };
    let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
    let tol = 1e-9 * (hi - lo).max(1e-12);
    t >= lo - tol && t <= hi + tol
}

fn line_line(a0: Point, a1: Point, b0: Point, b1: Point) -> Option<(f64, Point)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let det = da.cross(db);
    if det.abs() < 1e-12 * da.norm() * db.norm() {
        return None; // parallel or coincident: no transversal split point
    }
    let s = (b0 - a0).cross(db) / det;
    Some((s, a0 + da * s))
}

/// Union keep rule for a piece of primitive `prim`'s boundary.
///
/// Interior pieces: outside every other primitive; coincident boundaries
/// keep exactly one copy (lowest index) when the interiors agree, none when
/// they oppose. Canvas-edge pieces stay on the union boundary regardless of
/// other primitives' values there (the canvas bounds everything), again
/// deduplicated by index.
fn keep_piece(prim: usize, piece: &BoundarySeg, field: &Field) -> bool {
    let m = piece.midpoint();
    let on_canvas_edge = piece.source.is_none();
    let tangent = piece.mid_tangent();
    for (j, curves) in field.primitives().iter().enumerate() {
        if j == prim {
            continue;
        }
        let (fj, arg) = eval_primitive(curves, m.x, m.y);
        if fj > EPS_KEEP {
            continue;
        }
        if on_canvas_edge {
            // duplicate canvas pieces: primitive j reaches this edge too
            // and carries its own copy; lowest index keeps it
            if j < prim {
                return false;
            }
            continue;
        }
        if fj < -EPS_KEEP {
            return false; // strictly inside primitive j
        }
        // coincident with j's boundary: same interior side keeps one copy
        let (gx, gy) = curves[arg].gradient(m.x, m.y);
        let same_side = tangent.cross(Point::new(gx, gy)) < 0.0;
        if !same_side || j < prim {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::clip_primitive;
    use super::*;
    use crate::pseudo_field::ParabolicCurve;
    use crate::raster::Image;

    fn blob_primitive(cx: f64, cy: f64, r: f64, n_a: usize) -> Vec<ParabolicCurve> {
        (0..n_a)
            .map(|j| {
                let ang = std::f64::consts::TAU * j as f64 / n_a as f64;
                let (p, q) = (-ang.sin(), ang.cos());
                let (dx, dy) = (ang.cos(), ang.sin());
                let k = 0.7;
                let m = p * cx + q * cy;
                ParabolicCurve {
                    k,
                    p,
                    q,
                    d: dx - 2.0 * k * m * p,
                    e: dy - 2.0 * k * m * q,
                    f: k * m * m - (dx * cx + dy * cy) - r,
                }
            })
            .collect()
    }

    fn union_iou(field: &Field, contours: &[Contour], n: usize) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        for row in 0..n {
            for col in 0..n {
                let p = Image::pixel_center(n, n, row, col);
                let alg = field.eval(p.x, p.y).value < 0.0;
                let w: i32 = contours.iter().map(|c| c.winding_number(p)).sum();
                if alg && w != 0 {
                    inter += 1;
                }
                if alg || w != 0 {
                    union += 1;
                }
            }
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    fn clip_all(field: &Field) -> Vec<(usize, PrimitiveOutline)> {
        field
            .primitives()
            .iter()
            .enumerate()
            .filter_map(|(i, curves)| {
                let o = clip_primitive(curves).unwrap();
                (!o.is_empty()).then_some((i, o))
            })
            .collect()
    }

    #[test]
    fn disjoint_primitives_stay_separate() {
        let field = Field::new(vec![
            blob_primitive(-0.5, -0.4, 0.12, 4),
            blob_primitive(0.5, 0.45, 0.1, 4),
        ]);
        let outlines = clip_all(&field);
        let (contours, _) = merge_outlines(&outlines, &field).unwrap();
        assert_eq!(contours.len(), 2);
        let iou = union_iou(&field, &contours, 512);
        assert!(iou >= 0.999, "IoU {iou}");
    }

    #[test]
    fn identical_primitives_collapse_to_one() {
        let field = Field::new(vec![
            blob_primitive(0.1, 0.0, 0.2, 4),
            blob_primitive(0.1, 0.0, 0.2, 4),
        ]);
        let outlines = clip_all(&field);
        let (contours, _) = merge_outlines(&outlines, &field).unwrap();
        assert_eq!(contours.len(), 1, "idempotent union");
        let iou = union_iou(&field, &contours, 512);
        assert!(iou >= 0.999, "IoU {iou}");
    }

    #[test]
    fn overlapping_primitives_fuse() {
        let field = Field::new(vec![
            blob_primitive(-0.15, 0.0, 0.25, 4),
            blob_primitive(0.15, 0.05, 0.25, 4),
        ]);
        let outlines = clip_all(&field);
        let (contours, sources) = merge_outlines(&outlines, &field).unwrap();
        assert_eq!(contours.len(), 1, "single fused contour");
        let iou = union_iou(&field, &contours, 512);
        assert!(iou >= 0.999, "IoU {iou}");
        // provenance: every arc-sourced Bezier lies on its parabola
        for (contour, srcs) in contours.iter().zip(&sources) {
            for (curve, src) in contour.curves.iter().zip(srcs) {
                if let Some(parabola) = src {
                    for i in 0..=100 {
                        let t = i as f64 / 100.0;
                        let p = curve.eval(t);
                        assert!(
                            parabola.eval(p.x, p.y).abs() < 1e-6,
                            "emitted Bezier off its parabola"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn union_orientation_is_consistent() {
        let field = Field::new(vec![
            blob_primitive(0.0, 0.0, 0.3, 4),
            blob_primitive(0.4, 0.0, 0.2, 4),
        ]);
        let outlines = clip_all(&field);
        let (contours, _) = merge_outlines(&outlines, &field).unwrap();
        for c in &contours {
            assert!(c.is_closed(1e-9), "merged contour must close");
            assert!(c.signed_area() > 0.0, "outer contours are ccw");
        }
    }

    #[test]
    fn permutation_of_primitives_keeps_contour_count() {
        let a = blob_primitive(-0.2, -0.1, 0.22, 3);
        let b = blob_primitive(0.25, 0.2, 0.18, 3);
        let c = blob_primitive(0.0, 0.35, 0.15, 3);
        let f1 = Field::new(vec![a.clone(), b.clone(), c.clone()]);
        let f2 = Field::new(vec![c, a, b]);
        let (m1, _) = merge_outlines(&clip_all(&f1), &f1).unwrap();
        let (m2, _) = merge_outlines(&clip_all(&f2), &f2).unwrap();
        assert_eq!(m1.len(), m2.len());
    }

    #[test]
    fn random_unions_match_field_mask() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for trial in 0..20 {
            let n_p = rng.gen_range(2..=4);
            let n_a = rng.gen_range(3..=5);
            let prims: Vec<Vec<ParabolicCurve>> = (0..n_p)
                .map(|_| {
                    blob_primitive(
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(0.08..0.3),
                        n_a,
                    )
                })
                .collect();
            let field = Field::new(prims);
            let outlines = clip_all(&field);
            let (contours, _) = merge_outlines(&outlines, &field)
                .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
            let iou = union_iou(&field, &contours, 256);
            assert!(iou >= 0.995, "trial {trial}: IoU {iou}");
            // point-classification agreement away from boundaries
            let mut checked = 0;
            for _ in 0..2000 {
                let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let g = field.eval(p.x, p.y).value;
                if g.abs() < 1e-3 {
                    continue;
                }
                checked += 1;
                let w: i32 = contours.iter().map(|c| c.winding_number(p)).sum();
                assert_eq!(g < 0.0, w != 0, "trial {trial} at {p:?}: g = {g}");
            }
            assert!(checked > 1500);
        }
    }
}
