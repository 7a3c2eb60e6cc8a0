//! Exact signed distances from query points to a glyph outline, plus the two
//! supervision sets: distances at all pixel centers (grid) and at points
//! scattered near the contours.
//!
//! Magnitude comes from the closed-form nearest-point projection on each
//! quadratic (cubic derivative polynomial, Cardano). The glyph-level sign
//! uses the nonzero winding rule, which stays stable at corners where two
//! curves are equidistant; the per-curve cross-product sign is exposed
//! separately and agrees away from corners.

use crate::geom::Point;
use crate::glyph_ir::{GlyphOutline, QuadBezier};
use crate::raster::Image;
use crate::roots::solve_cubic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Read, Write};
use thiserror::Error;

/// Default half-width of the near-contour sampling band, in normalized
/// units (about two pixels at 128x128, bracketing the render transition).
pub const DEFAULT_BAND: f64 = 0.03;

/// Default number of near-contour samples.
pub const DEFAULT_CONTOUR_SAMPLES: usize = 4000;

#[derive(Debug, Error)]
pub enum SdfError {
    #[error("curve tangent vanishes at the foot point")]
    ZeroTangent,
    #[error("malformed {0} file: {1}")]
    Format(&'static str, String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One signed-distance observation at a point (negative inside).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfSample {
    pub x: f64,
    pub y: f64,
    pub d: f64,
}

/// Signed distances at every pixel center, row-major, row 0 on top.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<f64>,
}

impl SdfGrid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> Point {
        Image::pixel_center(self.width, self.height, row, col)
    }

    /// Pixel centers with negative distance (glyph interior).
    pub fn interior_points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(row, col) < 0.0 {
                    pts.push(self.pixel_center(row, col));
                }
            }
        }
        pts
    }
}

/// Near-contour signed-distance samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSamples {
    pub samples: Vec<SdfSample>,
}

/// Parameter of the nearest point on `curve` to `q`, in [0,1].
///
/// Solves the cubic stationarity condition of |P(t)-q|^2 in closed form,
/// then compares interior roots against both endpoints; ties break toward
/// the smaller t.
pub fn nearest_t(curve: &QuadBezier, q: Point) -> f64 {
    let a2 = curve.p0 - curve.p1 * 2.0 + curve.p2;
    let a1 = (curve.p1 - curve.p0) * 2.0;
    let a0 = curve.p0 - q;
    // d/dt |a2 t^2 + a1 t + a0|^2 = 0
    let c3 = 2.0 * a2.norm_sq();
    let c2 = 3.0 * a2.dot(a1);
    let c1 = a1.norm_sq() + 2.0 * a2.dot(a0);
    let c0 = a1.dot(a0);

    let mut candidates: Vec<f64> = vec![0.0, 1.0];
    for r in solve_cubic(c3, c2, c1, c0) {
        if r > 0.0 && r < 1.0 {
            candidates.push(r);
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut best_t = 0.0;
    let mut best_d = f64::INFINITY;
    for t in candidates {
        let d = curve.eval(t).dist(q);
        if d < best_d {
            best_d = d;
            best_t = t;
        }
    }
    best_t
}

/// Unsigned distance from `q` to the curve.
pub fn curve_distance(curve: &QuadBezier, q: Point) -> f64 {
    curve.eval(nearest_t(curve, q)).dist(q)
}

/// Signed distance to a single curve: magnitude from the nearest point,
/// sign from the cross product of (q - foot) with the travel direction
/// (negative when q lies left of travel, i.e. inside).
pub fn curve_signed_distance(curve: &QuadBezier, q: Point) -> Result<f64, SdfError> {
    let t = nearest_t(curve, q);
    let foot = curve.eval(t);
    let mut v = curve.deriv(t);
    if v.norm() < 1e-12 {
        // cusp at an endpoint: one-sided tangent
        v = if t < 0.5 {
            curve.p2 - curve.p1
        } else {
            curve.p1 - curve.p0
        };
        if v.norm() < 1e-12 {
            v = curve.p2 - curve.p0;
        }
        if v.norm() < 1e-12 {
            return Err(SdfError::ZeroTangent);
        }
    }
    let cross = (q - foot).cross(v);
    Ok(foot.dist(q) * cross.signum())
}

/// Signed distance to the whole outline: min unsigned distance over all
/// curves, sign from the nonzero winding number.
pub fn glyph_signed_distance(outline: &GlyphOutline, q: Point) -> f64 {
    let mut best = f64::INFINITY;
    for curve in outline.curves() {
        best = best.min(curve_distance(curve, q));
    }
    if outline.winding_number(q) != 0 {
        -best
    } else {
        best
    }
}

/// Signed distance through the nearest curve's cross-product sign instead
/// of winding.
///
/// When the nearest outline point is a corner, two curves are equidistant
/// and the cross product of the candidate whose tangent runs almost along
/// the point-to-foot direction is unreliable; among (near-)equidistant
/// candidates the sign is taken from the one whose tangent is most
/// orthogonal to that direction. Agrees with [`glyph_signed_distance`]
/// away from the zero set.
pub fn nearest_curve_signed_distance(outline: &GlyphOutline, q: Point) -> Result<f64, SdfError> {
    struct Candidate {
        dist: f64,
        foot: Point,
        tangent: Point,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut best = f64::INFINITY;
    for curve in outline.curves() {
        let t = nearest_t(curve, q);
        let foot = curve.eval(t);
        let mut tangent = curve.deriv(t);
        if tangent.norm() < 1e-12 {
            tangent = if t < 0.5 {
                curve.p2 - curve.p1
            } else {
                curve.p1 - curve.p0
            };
        }
        if tangent.norm() < 1e-12 {
            tangent = curve.p2 - curve.p0;
        }
        let dist = foot.dist(q);
        best = best.min(dist);
        candidates.push(Candidate {
            dist,
            foot,
            tangent,
        });
    }
    if candidates.is_empty() {
        return Err(SdfError::ZeroTangent);
    }
    let tol = 1e-9 * (1.0 + best);
    let mut sign = 0.0;
    let mut best_ortho = -1.0;
    for c in candidates {
        if c.dist > best + tol || c.tangent.norm() < 1e-12 {
            continue;
        }
        let w = q - c.foot;
        let cross = w.cross(c.tangent);
        let ortho = cross.abs() / (w.norm().max(1e-300) * c.tangent.norm());
        if ortho > best_ortho {
            best_ortho = ortho;
            sign = cross.signum();
        }
    }
    Ok(best * sign)
}

/// Exact signed distance at every pixel center mapped into [-1,1]^2.
pub fn compute_grid_sdf(outline: &GlyphOutline, width: usize, height: usize) -> SdfGrid {
    assert!(width >= 8 && height >= 8, "grid must be at least 8x8");
    let mut samples = vec![0.0; width * height];
    for row in 0..height {
        for col in 0..width {
            let q = Image::pixel_center(width, height, row, col);
            samples[row * width + col] = glyph_signed_distance(outline, q);
        }
    }
    SdfGrid {
        width,
        height,
        samples,
    }
}

// 8-point Gauss-Legendre nodes/weights on [-1,1].
const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.525_532_409_916_329, 0.3137066458778873),
    (-0.1834346424956498, 0.362_683_783_378_362),
    (0.1834346424956498, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

fn gl8_arclen(curve: &QuadBezier, t0: f64, t1: f64) -> f64 {
    let mid = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    GL8.iter()
        .map(|&(x, w)| w * curve.deriv(mid + half * x).norm())
        .sum::<f64>()
        * half
}

/// Arc length of curve over [t0, t1] by adaptive Gauss-Legendre quadrature.
pub fn arc_length(curve: &QuadBezier, t0: f64, t1: f64, tol: f64) -> f64 {
    fn recurse(curve: &QuadBezier, t0: f64, t1: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (t0 + t1);
        let left = gl8_arclen(curve, t0, mid);
        let right = gl8_arclen(curve, mid, t1);
        if depth >= 24 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            recurse(curve, t0, mid, left, 0.5 * tol, depth + 1)
                + recurse(curve, mid, t1, right, 0.5 * tol, depth + 1)
        }
    }
    recurse(curve, t0, t1, gl8_arclen(curve, t0, t1), tol, 0)
}

const ARCLEN_TOL: f64 = 1e-6;

/// Parameter t with arc_length(curve, 0, t) = target, by bisection
/// (arc length is strictly increasing).
fn t_at_arclen(curve: &QuadBezier, target: f64, total: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if target >= total {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if arc_length(curve, 0.0, mid, ARCLEN_TOL) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Draws `m` samples near the contours: positions uniform in arc length
/// along the union of contours, offset along the local normal by
/// u ~ Uniform(-band, band), with the exact signed distance recorded.
/// Deterministic for a fixed seed.
pub fn sample_contour_sdf(
    outline: &GlyphOutline,
    m: usize,
    band: f64,
    seed: u64,
) -> ContourSamples {
    assert!(m >= 1, "need at least one sample");
    assert!(band > 0.0, "band must be positive");

    let curves: Vec<&QuadBezier> = outline.curves().collect();
    let lengths: Vec<f64> = curves
        .iter()
        .map(|c| arc_length(c, 0.0, 1.0, ARCLEN_TOL))
        .collect();
    let total: f64 = lengths.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(m);
    while samples.len() < m {
        let mut s = rng.gen::<f64>() * total;
        let offset = rng.gen_range(-band..band);
        let mut idx = 0;
        while idx + 1 < curves.len() && s > lengths[idx] {
            s -= lengths[idx];
            idx += 1;
        }
        let curve = curves[idx];
        let t = t_at_arclen(curve, s, lengths[idx]);
        let mut tangent = curve.deriv(t);
        if tangent.norm() < 1e-12 {
            tangent = curve.p2 - curve.p0;
        }
        if tangent.norm() < 1e-12 {
            continue;
        }
        let p = curve.eval(t) + tangent.normalized().perp() * offset;
        let d = glyph_signed_distance(outline, p);
        samples.push(SdfSample {
            x: p.x,
            y: p.y,
            d,
        });
    }
    ContourSamples { samples }
}

// ---------------------------------------------------------------------------
// File formats: "SDF1 <width> <height>\n" + w*h little-endian f32 row-major,
// and "SDC1 <m>\n" + m (x, y, d) little-endian f32 triples.

pub fn write_sdf_grid(grid: &SdfGrid, mut w: impl Write) -> Result<(), SdfError> {
    writeln!(w, "SDF1 {} {}", grid.width, grid.height)?;
    let mut bytes = Vec::with_capacity(grid.samples.len() * 4);
    for &v in &grid.samples {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn read_header_line(buf: &[u8]) -> Option<(&str, usize)> {
    let end = buf.iter().position(|&b| b == b'\n')?;
    std::str::from_utf8(&buf[..end]).ok().map(|s| (s, end + 1))
}

pub fn read_sdf_grid(mut r: impl Read) -> Result<SdfGrid, SdfError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let bad = |m: &str| SdfError::Format("SDF1", m.to_string());
    let (header, body) = read_header_line(&buf).ok_or_else(|| bad("missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "SDF1" {
        return Err(bad("expected 'SDF1 <width> <height>'"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let need = width * height * 4;
    if buf.len() - body != need {
        return Err(bad("payload size mismatch"));
    }
    let samples = buf[body..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(SdfGrid {
        width,
        height,
        samples,
    })
}

pub fn write_contour_samples(cs: &ContourSamples, mut w: impl Write) -> Result<(), SdfError> {
    writeln!(w, "SDC1 {}", cs.samples.len())?;
    let mut bytes = Vec::with_capacity(cs.samples.len() * 12);
    for s in &cs.samples {
        bytes.extend_from_slice(&(s.x as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.y as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.d as f32).to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_contour_samples(mut r: impl Read) -> Result<ContourSamples, SdfError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let bad = |m: &str| SdfError::Format("SDC1", m.to_string());
    let (header, body) = read_header_line(&buf).ok_or_else(|| bad("missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 || fields[0] != "SDC1" {
        return Err(bad("expected 'SDC1 <m>'"));
    }
    let m: usize = fields[1].parse().map_err(|_| bad("count"))?;
    if buf.len() - body != m * 12 {
        return Err(bad("payload size mismatch"));
    }
    let samples = buf[body..]
        .chunks_exact(12)
        .map(|c| SdfSample {
            x: f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
            y: f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64,
            d: f32::from_le_bytes([c[8], c[9], c[10], c[11]]) as f64,
        })
        .collect();
    Ok(ContourSamples { samples })
}
