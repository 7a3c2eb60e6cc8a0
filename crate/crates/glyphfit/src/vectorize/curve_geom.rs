//! Local-frame geometry of parabolic-curve zero sets and the intersection
//! kernels used by clipping and merging.
//!
//! With (p, q) on the unit circle, rotating into u = p x + q y,
//! v = -q x + p y turns H into k u^2 + alpha u + beta v + f. For beta != 0
//! the zero set is the graph v(u) = -(k u^2 + alpha u + f) / beta, a
//! parabola parametrized by u (straight when k = 0). For beta = 0 it
//! degenerates into up to two lines u = const.

use crate::geom::Point;
use crate::pseudo_field::ParabolicCurve;
use crate::roots::{solve_quadratic, solve_quartic};

/// Threshold below which the perpendicular linear coefficient counts as
/// zero and the zero set is treated as parallel lines.
const DEGEN_BETA: f64 = 1e-12;

/// Graph-form parabola: all fields derive from a (p,q)-normalized curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaGeom {
    pub curve: ParabolicCurve,
    pub e1: Point,
    pub e2: Point,
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub f: f64,
}

impl ParabolaGeom {
    pub fn from_curve(curve: &ParabolicCurve) -> Option<Self> {
        let c = curve.normalized();
        if c.p * c.p + c.q * c.q < 0.5 {
            return None; // no quadratic direction
        }
        let e1 = Point::new(c.p, c.q);
        let e2 = Point::new(-c.q, c.p);
        let lin = Point::new(c.d, c.e);
        let beta = lin.dot(e2);
        if beta.abs() <= DEGEN_BETA {
            return None;
        }
        Some(ParabolaGeom {
            curve: c,
            e1,
            e2,
            k: c.k,
            alpha: lin.dot(e1),
            beta,
            f: c.f,
        })
    }

    /// v(u) coefficients: v = va u^2 + vb u + vc.
    pub fn v_coeffs(&self) -> (f64, f64, f64) {
        (-self.k / self.beta, -self.alpha / self.beta, -self.f / self.beta)
    }

    pub fn v_of_u(&self, u: f64) -> f64 {
        -(self.k * u * u + self.alpha * u + self.f) / self.beta
    }

    pub fn point(&self, u: f64) -> Point {
        self.e1 * u + self.e2 * self.v_of_u(u)
    }

    /// d point / d u.
    pub fn tangent(&self, u: f64) -> Point {
        self.e1 + self.e2 * (-(2.0 * self.k * u + self.alpha) / self.beta)
    }

    /// The graph parameter of a point (its coordinate along e1).
    pub fn param_of(&self, p: Point) -> f64 {
        self.e1.dot(p)
    }

    /// u of the parabola apex (the tangent-turning point); None for k = 0.
    pub fn apex_u(&self) -> Option<f64> {
        if self.k.abs() < 1e-300 {
            None
        } else {
            Some(-self.alpha / (2.0 * self.k))
        }
    }
}

/// One connected branch of a curve's zero set.
#[derive(Debug, Clone, Copy)]
pub enum Branch {
    Parabola(ParabolaGeom),
    /// Straight zero-set piece: point(w) = origin + dir * w, |dir| = 1.
    Line {
        origin: Point,
        dir: Point,
        curve: ParabolicCurve,
    },
}

impl Branch {
    pub fn point(&self, t: f64) -> Point {
        match self {
            Branch::Parabola(g) => g.point(t),
            Branch::Line { origin, dir, .. } => *origin + *dir * t,
        }
    }

    pub fn tangent(&self, t: f64) -> Point {
        match self {
            Branch::Parabola(g) => g.tangent(t),
            Branch::Line { dir, .. } => *dir,
        }
    }

    pub fn param_of(&self, p: Point) -> f64 {
        match self {
            Branch::Parabola(g) => g.param_of(p),
            Branch::Line { origin, dir, .. } => dir.dot(p - *origin),
        }
    }
}

/// Decomposes the zero set of a curve into branches. Empty when the zero
/// set is empty (or the curve is a nonzero constant).
pub fn zero_set_branches(curve: &ParabolicCurve) -> Vec<Branch> {
    let c = curve.normalized();
    if c.p * c.p + c.q * c.q < 0.5 {
        // no quadratic direction left: H = d x + e y + f
        let lin = Point::new(c.d, c.e);
        let n = lin.norm();
        if n < 1e-12 {
            return Vec::new();
        }
        let origin = lin * (-c.f / (n * n));
        return vec![Branch::Line {
            origin,
            dir: lin.perp() * (1.0 / n),
            curve: c,
        }];
    }
    if let Some(g) = ParabolaGeom::from_curve(&c) {
        return vec![Branch::Parabola(g)];
    }
    // beta = 0: H depends on u only; zero set = vertical lines u = root
    let e1 = Point::new(c.p, c.q);
    let e2 = Point::new(-c.q, c.p);
    let lin = Point::new(c.d, c.e);
    let alpha = lin.dot(e1);
    solve_quadratic(c.k, alpha, c.f)
        .into_iter()
        .map(|r| Branch::Line {
            origin: e1 * r,
            dir: e2,
            curve: c,
        })
        .collect()
}

/// Roots of H along the straight segment a -> b, as parameters s in [0,1].
pub fn curve_line_roots(curve: &ParabolicCurve, a: Point, b: Point) -> Vec<f64> {
    let delta = b - a;
    let m0 = curve.p * a.x + curve.q * a.y;
    let m1 = curve.p * delta.x + curve.q * delta.y;
    let l0 = curve.d * a.x + curve.e * a.y + curve.f;
    let l1 = curve.d * delta.x + curve.e * delta.y;
    let ca = curve.k * m1 * m1;
    let cb = 2.0 * curve.k * m0 * m1 + l1;
    let cc = curve.k * m0 * m0 + l0;
    solve_quadratic(ca, cb, cc)
        .into_iter()
        .filter(|s| (-1e-9..=1.0 + 1e-9).contains(s))
        .map(|s| s.clamp(0.0, 1.0))
        .collect()
}

/// Roots of H along a graph-parabola parametrization, as u parameters.
/// Substituting the quadratic point(u) into H gives a quartic in u.
pub fn curve_arc_roots(curve: &ParabolicCurve, geom: &ParabolaGeom) -> Vec<f64> {
    let (va, vb, vc) = geom.v_coeffs();
    let pq = Point::new(curve.p, curve.q);
    let de = Point::new(curve.d, curve.e);
    let g1 = pq.dot(geom.e1);
    let g2 = pq.dot(geom.e2);
    let h1 = de.dot(geom.e1);
    let h2 = de.dot(geom.e2);
    // m(u) and the linear part are both quadratic in u
    let m2 = g2 * va;
    let m1 = g1 + g2 * vb;
    let m0 = g2 * vc;
    let l2 = h2 * va;
    let l1 = h1 + h2 * vb;
    let l0 = h2 * vc + curve.f;
    let k = curve.k;
    let c4 = k * m2 * m2;
    let c3 = 2.0 * k * m2 * m1;
    let c2 = k * (m1 * m1 + 2.0 * m2 * m0) + l2;
    let c1 = 2.0 * k * m1 * m0 + l1;
    let c0 = k * m0 * m0 + l0;
    solve_quartic(c4, c3, c2, c1, c0).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_eq_y2() -> ParabolicCurve {
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
    fn graph_form_reproduces_parabola() {
        let g = ParabolaGeom::from_curve(&x_eq_y2()).unwrap();
        for u in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            let p = g.point(u);
            assert!((p.x - p.y * p.y).abs() < 1e-12, "point off x=y^2: {p:?}");
            assert!((x_eq_y2().eval(p.x, p.y)).abs() < 1e-12);
            assert!((g.param_of(p) - u).abs() < 1e-12);
        }
        // tangent matches finite differences
        let h = 1e-7;
        for u in [-0.8, 0.1, 0.9] {
            let t = g.tangent(u);
            let fd = (g.point(u + h) - g.point(u - h)) / (2.0 * h);
            assert!((t - fd).norm() < 1e-5);
        }
    }

    #[test]
    fn degenerate_beta_yields_lines() {
        // H = k u^2 - 0.25 with u = x: zero set x = +-0.5
        let c = ParabolicCurve {
            k: 1.0,
            p: 1.0,
            q: 0.0,
            d: 0.0,
            e: 0.0,
            f: -0.25,
        };
        let branches = zero_set_branches(&c);
        assert_eq!(branches.len(), 2);
        for b in &branches {
            let p = b.point(0.7);
            assert!((c.eval(p.x, p.y)).abs() < 1e-12);
            assert!((p.x.abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_linear_curve_yields_one_line() {
        let c = ParabolicCurve {
            k: 0.3,
            p: 0.0,
            q: 0.0,
            d: 1.0,
            e: 0.0,
            f: -0.25,
        };
        let branches = zero_set_branches(&c);
        assert_eq!(branches.len(), 1);
        let p = branches[0].point(0.3);
        assert!((p.x - 0.25).abs() < 1e-12);
    }

    #[test]
    fn line_roots_against_parabola() {
        // vertical segment x = 1 from y=-2 to 2 meets x = y^2 at y = +-1
        let roots = curve_line_roots(&x_eq_y2(), Point::new(1.0, -2.0), Point::new(1.0, 2.0));
        assert_eq!(roots.len(), 2);
        let ys: Vec<f64> = roots.iter().map(|s| -2.0 + 4.0 * s).collect();
        assert!((ys[0] + 1.0).abs() < 1e-9 || (ys[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn arc_roots_parabola_vs_parabola() {
        // x = y^2 and y = x^2 intersect at (0,0) and (1,1)
        let g = ParabolaGeom::from_curve(&x_eq_y2()).unwrap();
        let other = ParabolicCurve {
            k: 1.0,
            p: 1.0,
            q: 0.0,
            d: 0.0,
            e: -1.0,
            f: 0.0,
        };
        let mut roots = curve_arc_roots(&other, &g);
        roots.retain(|u| u.abs() < 10.0);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pts: Vec<Point> = roots.iter().map(|&u| g.point(u)).collect();
        assert!(
            pts.iter().any(|p| p.dist(Point::ZERO) < 1e-7),
            "missing origin: {pts:?}"
        );
        assert!(
            pts.iter().any(|p| p.dist(Point::new(1.0, 1.0)) < 1e-7),
            "missing (1,1): {pts:?}"
        );
        for p in &pts {
            assert!(other.eval(p.x, p.y).abs() < 1e-7);
            assert!(x_eq_y2().eval(p.x, p.y).abs() < 1e-7);
        }
    }
}
