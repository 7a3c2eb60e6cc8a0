//! Recursive canvas clipping: starting from the [-1,1]^2 square, intersect
//! the region with each curve's inside ({H < 0}) in turn, keeping an
//! explicit boundary representation the whole way.

use super::curve_geom::{curve_arc_roots, curve_line_roots, zero_set_branches, Branch};
use super::{
    stitch_loops, BoundarySeg, PrimitiveOutline, SegKind, VectorizeError, EPS_KEEP, STITCH_TOL,
};
use crate::geom::Point;
use crate::pseudo_field::ParabolicCurve;

/// Clips one primitive (the intersection of its curves' insides) against
/// the canvas square. Returns an outline with no loops when the region is
/// empty.
pub fn clip_primitive(curves: &[ParabolicCurve]) -> Result<PrimitiveOutline, VectorizeError> {
    let corners = [
        Point::new(-1.0, -1.0),
        Point::new(1.0, -1.0),
        Point::new(1.0, 1.0),
        Point::new(-1.0, 1.0),
    ];
    let mut segs: Vec<BoundarySeg> = (0..4)
        .map(|i| BoundarySeg::straight(corners[i], corners[(i + 1) % 4], None))
        .collect();
    let mut prev: Vec<ParabolicCurve> = Vec::new();
    for curve in curves {
        let c = curve.normalized();
        segs = clip_by_curve(segs, &c, &prev)?;
        if segs.is_empty() {
            return Ok(PrimitiveOutline::default());
        }
        prev.push(c);
    }
    let loops = stitch_loops(segs, STITCH_TOL).map_err(VectorizeError::NonManifoldBoundary)?;
    Ok(PrimitiveOutline { loops })
}

/// Strict membership in the region before the current curve: inside the
/// canvas and inside every previously processed curve.
fn region_interior(p: Point, prev: &[ParabolicCurve]) -> bool {
    p.x.abs() < 1.0 - EPS_KEEP
        && p.y.abs() < 1.0 - EPS_KEEP
        && prev.iter().all(|c| c.eval(p.x, p.y) < -EPS_KEEP)
}

fn seg_point_at(seg: &BoundarySeg, param: f64) -> Point {
    match &seg.kind {
        SegKind::Straight => seg.a.lerp(seg.b, param),
        SegKind::Arc { geom, .. } => geom.point(param),
    }
}

/// Roots of H along the segment in the segment's own parameter, plus the
/// travel-ordered parameter range.
fn seg_roots(seg: &BoundarySeg, curve: &ParabolicCurve) -> (Vec<f64>, f64, f64) {
    match &seg.kind {
        SegKind::Straight => (curve_line_roots(curve, seg.a, seg.b), 0.0, 1.0),
        SegKind::Arc { geom, u0, u1 } => {
            let (lo, hi) = if u0 <= u1 { (*u0, *u1) } else { (*u1, *u0) };
            let span = (hi - lo).max(1e-12);
            let roots = curve_arc_roots(curve, geom)
                .into_iter()
                .filter(|u| *u >= lo - 1e-9 * span && *u <= hi + 1e-9 * span)
                .map(|u| u.clamp(lo, hi))
                .collect();
            (roots, *u0, *u1)
        }
    }
}

/// Merges parameter values closer than `tol` into single representatives
/// (near-tangent double roots collapse to one touch point).
fn cluster(mut params: Vec<f64>, tol: f64) -> Vec<f64> {
    params.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::new();
    for p in params {
        match out.last_mut() {
            Some(last) if (p - *last).abs() <= tol => *last = 0.5 * (*last + p),
            _ => out.push(p),
        }
    }
    out
}

struct Cut {
    point: Point,
    branch: usize,
    branch_param: f64,
}

/// One clipping step: intersect the region bounded by `segs` with
/// {curve < 0}. `prev` holds the curves already applied (not including the
/// canvas, which is tested explicitly).
fn clip_by_curve(
    segs: Vec<BoundarySeg>,
    curve: &ParabolicCurve,
    prev: &[ParabolicCurve],
) -> Result<Vec<BoundarySeg>, VectorizeError> {
    let branches = zero_set_branches(curve);
    if branches.is_empty() {
        // H never changes sign: one probe decides everything
        let probe = segs[0].midpoint();
        return Ok(if curve.eval(probe.x, probe.y) > 0.0 {
            Vec::new()
        } else {
            segs
        });
    }

    let assign_branch = |p: Point| -> (usize, f64) {
        let mut best = (0, f64::INFINITY, 0.0);
        for (bi, br) in branches.iter().enumerate() {
            let t = br.param_of(p);
            let d = br.point(t).dist(p);
            if d < best.1 {
                best = (bi, d, t);
            }
        }
        (best.0, best.2)
    };

    let mut kept: Vec<BoundarySeg> = Vec::new();
    let mut cuts: Vec<Cut> = Vec::new();

    for seg in &segs {
        let (roots, t0, t1) = seg_roots(seg, curve);
        let span = (t1 - t0).abs().max(1e-12);
        let roots = cluster(roots, 1e-6 * span);

        // every intersection bounds a zero-set interval, even the ones
        // touching segment endpoints
        for &r in &roots {
            let p = seg_point_at(seg, r);
            let (branch, branch_param) = assign_branch(p);
            cuts.push(Cut {
                point: p,
                branch,
                branch_param,
            });
        }

        // split only at genuine sign changes strictly inside the segment
        let interior: Vec<f64> = roots
            .iter()
            .copied()
            .filter(|r| (r - t0).abs() > 1e-9 * span && (r - t1).abs() > 1e-9 * span)
            .collect();
        let mut split_params: Vec<(f64, Point)> = Vec::new();
        if !interior.is_empty() {
            // sample H between consecutive candidates (travel order)
            let mut stops = vec![t0];
            let mut ordered = interior.clone();
            if t1 < t0 {
                ordered.sort_by(|a, b| b.partial_cmp(a).unwrap());
            } else {
                ordered.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
            stops.extend(ordered.iter().copied());
            stops.push(t1);
            let h_at = |t: f64| {
                let p = seg_point_at(seg, t);
                curve.eval(p.x, p.y)
            };
            let gaps: Vec<f64> = stops
                .windows(2)
                .map(|w| h_at(0.5 * (w[0] + w[1])))
                .collect();
            let sgn = |h: f64| {
                if h > 1e-13 {
                    1
                } else if h < -1e-13 {
                    -1
                } else {
                    0
                }
            };
            for (i, &r) in ordered.iter().enumerate() {
                if sgn(gaps[i]) * sgn(gaps[i + 1]) < 0 {
                    split_params.push((r, seg_point_at(seg, r)));
                }
            }
        }

        for piece in seg.split_at(split_params) {
            let mid = piece.midpoint();
            let h = curve.eval(mid.x, mid.y);
            if h < -EPS_KEEP {
                kept.push(piece);
            } else if h <= EPS_KEEP {
                // piece runs along the new curve's zero set: keep it only if
                // the curve's inside is on the same side as the region
                let t = piece.mid_tangent();
                let (gx, gy) = curve.gradient(mid.x, mid.y);
                if t.cross(Point::new(gx, gy)) < 0.0 {
                    kept.push(piece);
                }
            }
        }
    }

    // zero-set pieces that run through the previous region become boundary
    for (bi, br) in branches.iter().enumerate() {
        let mut params: Vec<(f64, Point)> = cuts
            .iter()
            .filter(|c| c.branch == bi)
            .map(|c| (c.branch_param, c.point))
            .collect();
        params.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // shared corner points arrive once per adjacent segment
        let mut dedup: Vec<(f64, Point)> = Vec::new();
        for (t, p) in params.drain(..) {
            match dedup.last() {
                Some((lt, lp)) if (t - lt).abs() <= 1e-9 && lp.dist(p) <= 1e-9 => {}
                _ => dedup.push((t, p)),
            }
        }
        for w in dedup.windows(2) {
            let (ua, pa) = w[0];
            let (ub, pb) = w[1];
            if ub - ua <= 1e-12 {
                continue;
            }
            let mid = br.point(0.5 * (ua + ub));
            if !region_interior(mid, prev) {
                continue;
            }
            // direction: region interior ({H < 0}) on the left
            let t = br.tangent(0.5 * (ua + ub));
            let (gx, gy) = curve.gradient(mid.x, mid.y);
            let ascending = t.cross(Point::new(gx, gy)) < 0.0;
            let seg = match br {
                Branch::Parabola(geom) => {
                    if ascending {
                        BoundarySeg::arc(*geom, ua, ub, pa, pb)
                    } else {
                        BoundarySeg::arc(*geom, ub, ua, pb, pa)
                    }
                }
                Branch::Line { curve: lc, .. } => {
                    if ascending {
                        BoundarySeg::straight(pa, pb, Some(*lc))
                    } else {
                        BoundarySeg::straight(pb, pa, Some(*lc))
                    }
                }
            };
            kept.push(seg);
        }
    }

    Ok(kept)
}
