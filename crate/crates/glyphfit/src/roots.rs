//! Real-root finding for low-degree polynomials.
//!
//! The cubic solver is analytic (Cardano, trigonometric branch when all
//! three roots are real) with one Newton polish step per root to remove
//! cancellation error near repeated roots. The quartic goes through the
//! companion matrix: closed-form quartics are fragile near tangencies,
//! eigenvalues plus a Newton polish are not.

use arrayvec::ArrayVec;
use nalgebra::Matrix4;

/// Roots of `a x^2 + b x + c = 0`, ascending. Degenerate leading
/// coefficients fall through to the linear case.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> ArrayVec<f64, 2> {
    let mut out = ArrayVec::new();
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return out;
    }
    if a.abs() < 1e-14 * scale {
        if b.abs() > 1e-14 * scale {
            out.push(-c / b);
        }
        return out;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return out;
    }
    // Citardauq form: avoids cancellation when b dominates.
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    let (r0, r1) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    out.push(r0.min(r1));
    if r0 != r1 {
        out.push(r0.max(r1));
    }
    out
}

fn polish_cubic(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    let f = ((a * x + b) * x + c) * x + d;
    let df = (3.0 * a * x + 2.0 * b) * x + c;
    if df.abs() > 1e-300 {
        let step = f / df;
        if step.is_finite() {
            return x - step;
        }
    }
    x
}

/// Real roots of `a x^3 + b x^2 + c x + d = 0`, ascending.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> ArrayVec<f64, 3> {
    let mut out = ArrayVec::new();
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return out;
    }
    if a.abs() < 1e-12 * scale {
        for r in solve_quadratic(b, c, d) {
            out.push(r);
        }
        return out;
    }

    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let q = (bn * bn - 3.0 * cn) / 9.0;
    let r = (2.0 * bn * bn * bn - 9.0 * bn * cn + 27.0 * dn) / 54.0;
    let r2 = r * r;
    let q3 = q * q * q;

    if r2 <= q3 {
        if q3 <= 0.0 {
            // r = q = 0: triple root
            out.push(polish_cubic(a, b, c, d, -bn / 3.0));
            return out;
        }
        // Three real roots (repeated on the r2 == q3 boundary): trig branch.
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let m = -2.0 * q.sqrt();
        let off = bn / 3.0;
        for k in 0..3 {
            let ang = (theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0;
            out.push(polish_cubic(a, b, c, d, m * ang.cos() - off));
        }
    } else {
        let big_a = -r.signum() * (r.abs() + (r2 - q3).sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        out.push(polish_cubic(a, b, c, d, big_a + big_b - bn / 3.0));
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

fn polish_quartic(c: &[f64; 5], x: f64) -> f64 {
    let mut x = x;
    for _ in 0..2 {
        let f = (((c[0] * x + c[1]) * x + c[2]) * x + c[3]) * x + c[4];
        let df = ((4.0 * c[0] * x + 3.0 * c[1]) * x + 2.0 * c[2]) * x + c[3];
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Real roots of `c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0 = 0`, ascending.
///
/// Complex eigenvalue pairs with a small imaginary part (near-tangent
/// intersections) are projected onto the real axis and kept only if the
/// polished value actually satisfies the polynomial.
pub fn solve_quartic(c4: f64, c3: f64, c2: f64, c1: f64, c0: f64) -> ArrayVec<f64, 4> {
    let mut out = ArrayVec::new();
    let scale = c4
        .abs()
        .max(c3.abs())
        .max(c2.abs())
        .max(c1.abs())
        .max(c0.abs());
    if scale == 0.0 {
        return out;
    }
    if c4.abs() < 1e-12 * scale {
        for r in solve_cubic(c3, c2, c1, c0) {
            out.push(r);
        }
        return out;
    }

    let a = c3 / c4;
    let b = c2 / c4;
    let c = c1 / c4;
    let d = c0 / c4;
    #[rustfmt::skip]
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -d,
        1.0, 0.0, 0.0, -c,
        0.0, 1.0, 0.0, -b,
        0.0, 0.0, 1.0, -a,
    );
    let eig = companion.complex_eigenvalues();
    let coeffs = [c4, c3, c2, c1, c0];
    let root_scale = 1.0 + eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * root_scale {
            continue;
        }
        let x = polish_quartic(&coeffs, z.re);
        let residual = (((coeffs[0] * x + coeffs[1]) * x + coeffs[2]) * x + coeffs[3]) * x
            + coeffs[4];
        let local = scale * (1.0 + x.abs()).powi(4);
        if residual.abs() < 1e-7 * local {
            out.push(x);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn quadratic_basic() {
        let r = solve_quadratic(1.0, -3.0, 2.0);
        assert_eq!(r.len(), 2);
        assert_close(r[0], 1.0, 1e-12);
        assert_close(r[1], 2.0, 1e-12);
        assert!(solve_quadratic(1.0, 0.0, 1.0).is_empty());
        let lin = solve_quadratic(0.0, 2.0, -4.0);
        assert_eq!(lin.len(), 1);
        assert_close(lin[0], 2.0, 1e-12);
    }

    #[test]
    fn cubic_three_real_roots() {
        // (x-1)(x-2)(x-3)
        let r = solve_cubic(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        assert_close(r[0], 1.0, 1e-9);
        assert_close(r[1], 2.0, 1e-9);
        assert_close(r[2], 3.0, 1e-9);
    }

    #[test]
    fn cubic_single_real_root() {
        // x^3 + x + 1 has one real root near -0.6823
        let r = solve_cubic(1.0, 0.0, 1.0, 1.0);
        assert_eq!(r.len(), 1);
        let x = r[0];
        assert_close(x * x * x + x + 1.0, 0.0, 1e-12);
    }

    #[test]
    fn cubic_repeated_root_is_polished() {
        // x^2 (x - 1): double root at 0, simple at 1
        let r = solve_cubic(1.0, -1.0, 0.0, 0.0);
        assert!(r.iter().any(|&x| (x - 1.0).abs() < 1e-9));
        assert!(r.iter().any(|&x| x.abs() < 1e-6));
    }

    #[test]
    fn cubic_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let roots: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = rng.gen_range(0.5..2.0);
            // expand a (x-r0)(x-r1)(x-r2)
            let (r0, r1, r2) = (roots[0], roots[1], roots[2]);
            let b = -a * (r0 + r1 + r2);
            let c = a * (r0 * r1 + r0 * r2 + r1 * r2);
            let d = -a * r0 * r1 * r2;
            let found = solve_cubic(a, b, c, d);
            for want in &roots {
                assert!(
                    found.iter().any(|x| (x - want).abs() < 1e-6),
                    "missing root {want} among {found:?}"
                );
            }
        }
    }

    #[test]
    fn quartic_biquadratic() {
        // (x^2-1)(x^2-4)
        let r = solve_quartic(1.0, 0.0, -5.0, 0.0, 4.0);
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert_close(*got, want, 1e-9);
        }
    }

    #[test]
    fn quartic_no_real_roots() {
        // (x^2+1)(x^2+4)
        let r = solve_quartic(1.0, 0.0, 5.0, 0.0, 4.0);
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn quartic_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let roots: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let lead = rng.gen_range(0.5..2.0);
            // expand lead * prod (x - r_i), ascending coefficients
            let mut coeff = vec![lead];
            for &r in &roots {
                let mut next = vec![0.0; coeff.len() + 1];
                for (i, &c) in coeff.iter().enumerate() {
                    next[i] += c * -r;
                    next[i + 1] += c;
                }
                coeff = next;
            }
            let found = solve_quartic(coeff[4], coeff[3], coeff[2], coeff[1], coeff[0]);
            for want in &roots {
                assert!(
                    found.iter().any(|x| (x - want).abs() < 1e-5),
                    "missing root {want} among {found:?} for {coeff:?}"
                );
            }
        }
    }

    #[test]
    fn quartic_near_tangent_pair() {
        // (x^2 + 1e-10)(x-1)(x+1): complex pair hugging the real axis
        // must not produce spurious roots that fail the residual check,
        // while the two genuine roots survive.
        let r = solve_quartic(1.0, 0.0, 1e-10 - 1.0, 0.0, -1e-10);
        assert!(r.iter().any(|&x| (x - 1.0).abs() < 1e-7));
        assert!(r.iter().any(|&x| (x + 1.0).abs() < 1e-7));
    }
}
