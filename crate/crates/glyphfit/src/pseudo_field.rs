//! The learnable implicit representation: parabolic pseudo-distance curves,
//! max-composed into primitives, min-composed into a field, rasterized with
//! a smooth cubic-step transfer.
//!
//! The max/min composition is kept hard; gradients route to the single
//! selected curve per evaluation point (ties break to the lowest index, so
//! selection is deterministic).

use crate::raster::Image;
use std::io::{self, Read, Write};
use thiserror::Error;

/// Transition half-width of the raster transfer, in normalized units.
pub const DEFAULT_GAMMA: f64 = 0.02;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("malformed PFD1 file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One parabolic curve H(x,y) = k (p x + q y)^2 + d x + e y + f.
/// The zero set is a parabola (for k != 0 and a linear part not parallel
/// to (p,q)); H < 0 is the inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicCurve {
    pub k: f64,
    pub p: f64,
    pub q: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl ParabolicCurve {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.p * x + self.q * y;
        self.k * m * m + self.d * x + self.e * y + self.f
    }

    /// Gradient of H at (x, y).
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let m = self.p * x + self.q * y;
        (
            2.0 * self.k * m * self.p + self.d,
            2.0 * self.k * m * self.q + self.e,
        )
    }

    pub fn params(&self) -> [f64; 6] {
        [self.k, self.p, self.q, self.d, self.e, self.f]
    }

    pub fn from_params(v: [f64; 6]) -> Self {
        ParabolicCurve {
            k: v[0],
            p: v[1],
            q: v[2],
            d: v[3],
            e: v[4],
            f: v[5],
        }
    }

    /// Rescales so that p^2 + q^2 = 1 without changing H anywhere:
    /// k absorbs the squared norm.
    pub fn normalized(&self) -> Self {
        let n2 = self.p * self.p + self.q * self.q;
        if n2 == 0.0 {
            return *self;
        }
        let n = n2.sqrt();
        ParabolicCurve {
            k: self.k * n2,
            p: self.p / n,
            q: self.q / n,
            d: self.d,
            e: self.e,
            f: self.f,
        }
    }
}

/// Value of a primitive (max over its curves) and the selected curve index.
pub fn eval_primitive(curves: &[ParabolicCurve], x: f64, y: f64) -> (f64, usize) {
    assert!(!curves.is_empty());
    let mut best = curves[0].eval(x, y);
    let mut idx = 0;
    for (j, c) in curves.iter().enumerate().skip(1) {
        let h = c.eval(x, y);
        if h > best {
            best = h;
            idx = j;
        }
    }
    (best, idx)
}

/// Field evaluation result with the argmin/argmax route for gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub primitive: usize,
    pub curve: usize,
}

/// N_p primitives of N_a parabolic curves each; the glyph is the set where
/// the min-over-primitives of the max-over-curves is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    primitives: Vec<Vec<ParabolicCurve>>,
}

impl Field {
    pub fn new(primitives: Vec<Vec<ParabolicCurve>>) -> Self {
        assert!(!primitives.is_empty(), "need at least one primitive");
        let n_a = primitives[0].len();
        assert!(n_a >= 1, "need at least one curve per primitive");
        assert!(
            primitives.iter().all(|p| p.len() == n_a),
            "primitives must have equal curve counts"
        );
        Field { primitives }
    }

    pub fn n_primitives(&self) -> usize {
        self.primitives.len()
    }

    pub fn curves_per_primitive(&self) -> usize {
        self.primitives[0].len()
    }

    pub fn primitives(&self) -> &[Vec<ParabolicCurve>] {
        &self.primitives
    }

    pub fn primitive(&self, i: usize) -> &[ParabolicCurve] {
        &self.primitives[i]
    }

    pub fn curve_mut(&mut self, i: usize, j: usize) -> &mut ParabolicCurve {
        &mut self.primitives[i][j]
    }

    pub fn eval(&self, x: f64, y: f64) -> FieldEval {
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        let mut best_j = 0;
        for (i, curves) in self.primitives.iter().enumerate() {
            let (v, j) = eval_primitive(curves, x, y);
            if v < best {
                best = v;
                best_i = i;
                best_j = j;
            }
        }
        FieldEval {
            value: best,
            primitive: best_i,
            curve: best_j,
        }
    }

    /// Flat parameter vector in (primitive, curve, [k,p,q,d,e,f]) order.
    pub fn flat_params(&self) -> Vec<f64> {
        self.primitives
            .iter()
            .flat_map(|curves| curves.iter().flat_map(|c| c.params()))
            .collect()
    }

    pub fn from_flat(n_p: usize, n_a: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), n_p * n_a * 6);
        let primitives = (0..n_p)
            .map(|i| {
                (0..n_a)
                    .map(|j| {
                        let base = (i * n_a + j) * 6;
                        ParabolicCurve::from_params([
                            flat[base],
                            flat[base + 1],
                            flat[base + 2],
                            flat[base + 3],
                            flat[base + 4],
                            flat[base + 5],
                        ])
                    })
                    .collect()
            })
            .collect();
        Field::new(primitives)
    }

    /// Normalizes every curve's (p, q) to the unit circle (H unchanged).
    pub fn normalized(&self) -> Field {
        Field::new(
            self.primitives
                .iter()
                .map(|curves| curves.iter().map(|c| c.normalized()).collect())
                .collect(),
        )
    }
}

/// Render settings: image size and the transfer half-width gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub gamma: f64,
    pub width: usize,
    pub height: usize,
}

impl RenderConfig {
    pub fn new(size: usize) -> Self {
        RenderConfig {
            gamma: DEFAULT_GAMMA,
            width: size,
            height: size,
        }
    }
}

/// Smooth-step raster transfer: 1 outside (g > gamma), 0 inside
/// (g < -gamma), cubic blend in between. Exactly 0/0.5/1 at -gamma/0/gamma.
pub fn raster_intensity(g: f64, gamma: f64) -> f64 {
    if g > gamma {
        1.0
    } else if g < -gamma {
        0.0
    } else {
        let r = g / gamma;
        0.5 - 0.25 * (r * r * r - 3.0 * r)
    }
}

/// Derivative of the transfer with respect to g; zero outside the band.
pub fn raster_intensity_deriv(g: f64, gamma: f64) -> f64 {
    if g.abs() > gamma {
        0.0
    } else {
        let r = g / gamma;
        -(3.0 / (4.0 * gamma)) * (r * r - 1.0)
    }
}

/// Renders the field at pixel centers (same lattice as the exact SDF grid).
pub fn render(field: &Field, cfg: &RenderConfig) -> Image {
    render_traced(field, cfg).0
}

/// Render plus the per-pixel evaluation trace (value and selected indices),
/// for gradient routing without re-evaluating the field.
pub fn render_traced(field: &Field, cfg: &RenderConfig) -> (Image, Vec<FieldEval>) {
    let mut trace = Vec::with_capacity(cfg.width * cfg.height);
    let img = Image::from_fn(cfg.width, cfg.height, |row, col| {
        let p = Image::pixel_center(cfg.width, cfg.height, row, col);
        let ev = field.eval(p.x, p.y);
        trace.push(ev);
        raster_intensity(ev.value, cfg.gamma)
    });
    (img, trace)
}

/// Per-parameter gradient accumulator, same layout as `Field::flat_params`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrads {
    pub n_p: usize,
    pub n_a: usize,
    pub data: Vec<f64>,
}

impl FieldGrads {
    pub fn zeros(field: &Field) -> Self {
        FieldGrads {
            n_p: field.n_primitives(),
            n_a: field.curves_per_primitive(),
            data: vec![0.0; field.n_primitives() * field.curves_per_primitive() * 6],
        }
    }

    /// Adds `adjoint * dH/dtheta` for the selected curve at (x, y).
    pub fn accumulate(&mut self, field: &Field, ev: &FieldEval, x: f64, y: f64, adjoint: f64) {
        let c = &field.primitives()[ev.primitive][ev.curve];
        let m = c.p * x + c.q * y;
        let base = (ev.primitive * self.n_a + ev.curve) * 6;
        self.data[base] += adjoint * m * m;
        self.data[base + 1] += adjoint * 2.0 * c.k * m * x;
        self.data[base + 2] += adjoint * 2.0 * c.k * m * y;
        self.data[base + 3] += adjoint * x;
        self.data[base + 4] += adjoint * y;
        self.data[base + 5] += adjoint;
    }
}

/// Backpropagates an image-shaped adjoint through the raster transfer and
/// the max/min selection into curve-parameter gradients.
pub fn render_gradient(field: &Field, cfg: &RenderConfig, upstream: &Image) -> FieldGrads {
    assert_eq!(upstream.width, cfg.width);
    assert_eq!(upstream.height, cfg.height);
    let mut grads = FieldGrads::zeros(field);
    for row in 0..cfg.height {
        for col in 0..cfg.width {
            let p = Image::pixel_center(cfg.width, cfg.height, row, col);
            let ev = field.eval(p.x, p.y);
            let didg = raster_intensity_deriv(ev.value, cfg.gamma);
            if didg == 0.0 {
                continue;
            }
            let adjoint = upstream.get(row, col) * didg;
            grads.accumulate(field, &ev, p.x, p.y, adjoint);
        }
    }
    grads
}

// ---------------------------------------------------------------------------
// PFD1 serialization: "PFD1 <N_p> <N_a>\n" + N_p*N_a*6 little-endian f32 in
// (primitive, curve, [k,p,q,d,e,f]) order.

pub fn write_field(field: &Field, mut w: impl Write) -> Result<(), FieldError> {
    writeln!(
        w,
        "PFD1 {} {}",
        field.n_primitives(),
        field.curves_per_primitive()
    )?;
    let mut bytes = Vec::new();
    for v in field.flat_params() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_field(mut r: impl Read) -> Result<Field, FieldError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let bad = |m: &str| FieldError::Format(m.to_string());
    let end = buf
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header"))?;
    let header = std::str::from_utf8(&buf[..end]).map_err(|_| bad("header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "PFD1" {
        return Err(bad("expected 'PFD1 <N_p> <N_a>'"));
    }
    let n_p: usize = fields[1].parse().map_err(|_| bad("N_p"))?;
    let n_a: usize = fields[2].parse().map_err(|_| bad("N_a"))?;
    if n_p == 0 || n_a == 0 {
        return Err(bad("empty field"));
    }
    let body = &buf[end + 1..];
    if body.len() != n_p * n_a * 6 * 4 {
        return Err(bad("payload size mismatch"));
    }
    let flat: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(Field::from_flat(n_p, n_a, &flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parabola_x_eq_y2() -> ParabolicCurve {
        // x = y^2 as H = y^2 - x
        ParabolicCurve {
            k: 1.0,
            p: 0.0,
            q: 1.0,
            d: -1.0,
            e: 0.0,
            f: 0.0,
        }
    }

    #[test]
    fn eval_curve_direct_substitution() {
        let c = parabola_x_eq_y2();
        assert_eq!(c.eval(4.0, 1.0), -3.0);
        assert_eq!(c.eval(1.0, 1.0), 0.0);
        assert_eq!(c.eval(0.0, 1.0), 1.0);
    }

    #[test]
    fn primitive_max_and_tie_rule() {
        let consts = |f: f64| ParabolicCurve {
            k: 0.0,
            p: 0.0,
            q: 0.0,
            d: 0.0,
            e: 0.0,
            f,
        };
        let (v, j) = eval_primitive(&[consts(-1.0), consts(0.5), consts(-2.0)], 0.0, 0.0);
        assert_eq!((v, j), (0.5, 1));
        let (v, j) = eval_primitive(&[consts(0.25)], 0.0, 0.0);
        assert_eq!((v, j), (0.25, 0));
        let (v, j) = eval_primitive(&[consts(0.7), consts(0.7), consts(0.7)], 0.0, 0.0);
        assert_eq!((v, j), (0.7, 0), "ties break to the lowest index");
    }

    #[test]
    fn field_min_and_identity() {
        let consts = |f: f64| ParabolicCurve {
            k: 0.0,
            p: 0.0,
            q: 0.0,
            d: 0.0,
            e: 0.0,
            f,
        };
        let field = Field::new(vec![vec![consts(0.5)], vec![consts(-0.2)]]);
        let ev = field.eval(0.0, 0.0);
        assert_eq!(ev.value, -0.2);
        assert_eq!(ev.primitive, 1);

        let single = Field::new(vec![vec![ParabolicCurve {
            k: 1.0,
            p: 1.0,
            q: 0.0,
            d: 0.0,
            e: -1.0,
            f: 0.0,
        }]]);
        assert_eq!(single.eval(1.0, 1.0).value, 0.0);
    }

    #[test]
    fn transfer_boundary_identities() {
        let gamma = DEFAULT_GAMMA;
        assert_eq!(raster_intensity(-gamma, gamma), 0.0);
        assert_eq!(raster_intensity(0.0, gamma), 0.5);
        assert_eq!(raster_intensity(gamma, gamma), 1.0);
        // direct substitution at gamma/2
        let v = raster_intensity(gamma / 2.0, gamma);
        assert!((v - 0.84375).abs() < 1e-15, "{v}");
        // monotone nondecreasing
        let mut prev = -0.1;
        let mut last = raster_intensity(prev, gamma);
        for i in 1..=10_000 {
            let g = -0.1 + 0.2 * i as f64 / 10_000.0;
            let v = raster_intensity(g, gamma);
            assert!(v >= last, "not monotone at g={g}");
            prev = g;
            last = v;
        }
        let _ = prev;
    }

    #[test]
    fn transfer_derivative_saturation_and_midpoint() {
        let gamma = 0.02;
        assert_eq!(raster_intensity_deriv(gamma * 1.01, gamma), 0.0);
        assert_eq!(raster_intensity_deriv(-gamma * 1.01, gamma), 0.0);
        let mid = raster_intensity_deriv(0.0, gamma);
        assert!((mid - 3.0 / (4.0 * gamma)).abs() < 1e-12);
    }

    fn random_field(rng: &mut ChaCha8Rng, n_p: usize, n_a: usize) -> Field {
        Field::new(
            (0..n_p)
                .map(|_| {
                    (0..n_a)
                        .map(|_| {
                            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                            ParabolicCurve {
                                k: rng.gen_range(0.5..1.5) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 },
                                p: -angle.sin(),
                                q: angle.cos(),
                                d: angle.cos(),
                                e: angle.sin(),
                                f: rng.gen_range(-0.4..0.1),
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    #[test]
    fn render_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cfg = RenderConfig {
            gamma: 0.05,
            width: 16,
            height: 16,
        };
        let h = 1e-5;
        for trial in 0..100 {
            let field = random_field(&mut rng, 2, 2);
            // random upstream adjoint image
            let upstream = Image::from_fn(16, 16, |_, _| rng.gen_range(-1.0..1.0));
            let grads = render_gradient(&field, &cfg, &upstream);

            // scalar objective: sum(upstream * rendered)
            let objective = |f: &Field| -> f64 {
                let img = render(f, &cfg);
                img.data
                    .iter()
                    .zip(&upstream.data)
                    .map(|(a, b)| a * b)
                    .sum()
            };

            let flat = field.flat_params();
            let mut fd = vec![0.0; flat.len()];
            for i in 0..flat.len() {
                let mut plus = flat.clone();
                plus[i] += h;
                let mut minus = flat.clone();
                minus[i] -= h;
                fd[i] = (objective(&Field::from_flat(2, 2, &plus))
                    - objective(&Field::from_flat(2, 2, &minus)))
                    / (2.0 * h);
            }
            let num: f64 = grads
                .data
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let den = fd
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(grads.data.iter().map(|v| v * v).sum::<f64>().sqrt())
                .max(1e-9);
            assert!(num / den < 1e-3, "trial {trial}: rel err {}", num / den);
        }
    }

    #[test]
    fn field_value_invariant_under_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let field = random_field(&mut rng, 3, 3);
        let mut shuffled: Vec<Vec<ParabolicCurve>> =
            field.primitives().to_vec();
        shuffled.rotate_left(1);
        for p in &mut shuffled {
            p.rotate_left(2);
        }
        let permuted = Field::new(shuffled);
        for _ in 0..200 {
            let x = rng.gen_range(-1.0..1.0);
            let y = rng.gen_range(-1.0..1.0);
            assert!((field.eval(x, y).value - permuted.eval(x, y).value).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_preserves_h() {
        let c = ParabolicCurve {
            k: 0.8,
            p: 3.0,
            q: 4.0,
            d: 0.2,
            e: -0.4,
            f: 0.1,
        };
        let n = c.normalized();
        assert!((n.p * n.p + n.q * n.q - 1.0).abs() < 1e-12);
        for (x, y) in [(0.3, -0.2), (1.0, 1.0), (-0.7, 0.5)] {
            assert!((c.eval(x, y) - n.eval(x, y)).abs() < 1e-9);
        }
    }

    #[test]
    fn pfd_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let field = random_field(&mut rng, 4, 3);
        let mut buf = Vec::new();
        write_field(&field, &mut buf).unwrap();
        assert!(buf.starts_with(b"PFD1 4 3\n"));
        assert_eq!(buf.len(), 9 + 4 * 3 * 6 * 4);
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back.n_primitives(), 4);
        for (a, b) in field.flat_params().iter().zip(back.flat_params()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
