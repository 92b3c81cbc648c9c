//! Quadrature rules: Gauss-Legendre and Gauss-Jacobi on `[0, 1]`, a
//! degree-5 triangle rule and weighted triangle rules for `|x|^l`.
//!
//! Triangles with a vertex at the origin are integrated through the
//! collapsed map `(s, t) -> s (A + t (B - A))`, whose Jacobian `s·(A×B)`
//! together with `|x|^l = s^l |A + t(B - A)|^l` leaves a Gauss-Jacobi weight
//! `s^{l+1}` in the radial direction. All other triangles use the 7-point
//! rule, subdivided until they are small compared with their distance from
//! the origin.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::point::{orient, segment_distance, Point};

/// A one-dimensional rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<f64>()
            * h
    }
}

/// Gauss-Jacobi rule on `[0, 1]` for the weight `s^alpha`, `alpha > -1`,
/// by the Golub-Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, alpha: f64) -> GaussRule {
    assert!(n >= 1, "rule needs at least one node");
    assert!(alpha > -1.0, "weight s^alpha must be integrable");
    // Jacobi weight (1-x)^0 (1+x)^alpha on [-1, 1]
    let b = alpha;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            b / (b + 2.0)
        } else {
            let s = 2.0 * kf + b;
            (b * b) / (s * (s + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + b;
            let beta = 4.0 * m * m * (m + b) * (m + b) / (s * s * (s + 1.0) * (s - 1.0));
            let off = beta.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = 1.0 / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (0.5 * (eig.eigenvalues[k] + 1.0), mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi(n, 0.0)
}

pub(crate) fn gl7() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(7))
}

pub(crate) fn gl16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Adaptive Gauss quadrature on `[a, b]` by interval halving: a piece is
/// accepted once the halves agree with the whole to `rel_tol`.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rule: &GaussRule,
    rel_tol: f64,
) -> f64 {
    adaptive_gauss_abs(f, a, b, rule, rel_tol, 0.0)
}

/// [`adaptive_gauss`] that also accepts a piece once the halves agree to
/// `abs_tol`; needed for integrands that change sign.
pub fn adaptive_gauss_abs<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rule: &GaussRule,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        rule: &GaussRule,
        rel_tol: f64,
        abs_tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = rule.integrate(a, m, f);
        let right = rule.integrate(m, b, f);
        let refined = left + right;
        let diff = (refined - whole).abs();
        if depth >= 40 || diff <= rel_tol * refined.abs() || diff <= abs_tol.max(f64::MIN_POSITIVE) {
            return refined;
        }
        let tol = 0.5 * abs_tol;
        recurse(f, a, m, left, rule, rel_tol, tol, depth + 1)
            + recurse(f, m, b, right, rule, rel_tol, tol, depth + 1)
    }
    let whole = rule.integrate(a, b, f);
    recurse(f, a, b, whole, rule, rel_tol, abs_tol, 0)
}

/// Degree-5 seven point rule on the reference triangle, as barycentric
/// coordinates and weights summing to one.
pub fn triangle7() -> &'static [([f64; 3], f64); 7] {
    static RULE: OnceLock<[([f64; 3], f64); 7]> = OnceLock::new();
    RULE.get_or_init(|| {
        let s15 = 15f64.sqrt();
        let a1 = (9.0 - 2.0 * s15) / 21.0;
        let b1 = (6.0 + s15) / 21.0;
        let a2 = (9.0 + 2.0 * s15) / 21.0;
        let b2 = (6.0 - s15) / 21.0;
        let w1 = (155.0 + s15) / 1200.0;
        let w2 = (155.0 - s15) / 1200.0;
        [
            ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
            ([a1, b1, b1], w1),
            ([b1, a1, b1], w1),
            ([b1, b1, a1], w1),
            ([a2, b2, b2], w2),
            ([b2, a2, b2], w2),
            ([b2, b2, a2], w2),
        ]
    })
}

/// A quadrature node carrying the weight `|x|^l` in its coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub point: Point,
    pub weight: f64,
}

/// Builds rules approximating `∫_T g(x) |x|^l dx` with positive weights.
#[derive(Debug, Clone)]
pub struct WeightedQuadrature {
    l: f64,
    radial: GaussRule,
    along: GaussRule,
    /// subdivide a triangle not touching the origin while diam > far_ratio · dist
    far_ratio: f64,
}

impl WeightedQuadrature {
    pub fn new(l: f64) -> Self {
        Self {
            l,
            radial: gauss_jacobi(3, l + 1.0),
            along: gauss_legendre(6),
            far_ratio: 0.1,
        }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Appends the nodes of the weighted rule for the triangle `abc`
    /// (any orientation) to `out`.
    pub fn push_triangle(&self, a: Point, b: Point, c: Point, out: &mut Vec<QuadPoint>) {
        let scale = a.norm().max(b.norm()).max(c.norm());
        let eps = 1e-14 * scale.max(f64::MIN_POSITIVE);
        let verts = [a, b, c];
        if let Some(k) = verts.iter().position(|v| v.norm() <= eps) {
            let p = verts[(k + 1) % 3];
            let q = verts[(k + 2) % 3];
            self.push_collapsed(p, q, out);
            return;
        }
        if self.l == 0.0 {
            push_plain(a, b, c, 0.0, out);
            return;
        }
        let area2 = orient(a, b, c);
        let o = Point::ORIGIN;
        let (oa, ob, oc) = (orient(o, a, b), orient(o, b, c), orient(o, c, a));
        let inside = if area2 > 0.0 {
            oa > 0.0 && ob > 0.0 && oc > 0.0
        } else {
            oa < 0.0 && ob < 0.0 && oc < 0.0
        };
        if inside {
            // origin strictly interior: three collapsed pieces
            self.push_collapsed(a, b, out);
            self.push_collapsed(b, c, out);
            self.push_collapsed(c, a, out);
            return;
        }
        self.push_far(a, b, c, 0, out);
    }

    fn push_far(&self, a: Point, b: Point, c: Point, depth: u32, out: &mut Vec<QuadPoint>) {
        let o = Point::ORIGIN;
        let dist = segment_distance(o, a, b)
            .min(segment_distance(o, b, c))
            .min(segment_distance(o, c, a));
        let diam = a.distance(b).max(b.distance(c)).max(c.distance(a));
        if diam <= self.far_ratio * dist || depth >= 12 {
            let l = self.l;
            push_plain(a, b, c, l, out);
            return;
        }
        let (ab, bc, ca) = (a.midpoint(b), b.midpoint(c), c.midpoint(a));
        for (p, q, r) in [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)] {
            if p.norm() == 0.0 || q.norm() == 0.0 || r.norm() == 0.0 {
                self.push_triangle(p, q, r, out);
            } else {
                self.push_far(p, q, r, depth + 1, out);
            }
        }
    }

    /// Triangle `(0, p, q)`; the weight is taken with the orientation sign
    /// removed so the caller may pass either orientation.
    fn push_collapsed(&self, p: Point, q: Point, out: &mut Vec<QuadPoint>) {
        let jac = p.cross(q).abs();
        if jac == 0.0 {
            return;
        }
        let mut pieces = vec![(0.0f64, 1.0f64)];
        let mut accepted = Vec::new();
        while let Some((t0, t1)) = pieces.pop() {
            let x0 = p.lerp(q, t0);
            let x1 = p.lerp(q, t1);
            let len = x0.distance(x1);
            let dist = segment_distance(Point::ORIGIN, x0, x1);
            if len <= 0.5 * dist || t1 - t0 < 1e-6 {
                accepted.push((t0, t1));
            } else {
                let tm = 0.5 * (t0 + t1);
                pieces.push((tm, t1));
                pieces.push((t0, tm));
            }
        }
        accepted.sort_by(|u, v| u.0.total_cmp(&v.0));
        for (t0, t1) in accepted {
            let h = t1 - t0;
            for (&tn, &tw) in self.along.nodes.iter().zip(&self.along.weights) {
                let x = p.lerp(q, t0 + h * tn);
                let rho_l = x.norm().powf(self.l);
                for (&sn, &sw) in self.radial.nodes.iter().zip(&self.radial.weights) {
                    out.push(QuadPoint {
                        point: x * sn,
                        weight: jac * rho_l * h * tw * sw,
                    });
                }
            }
        }
    }
}

fn push_plain(a: Point, b: Point, c: Point, l: f64, out: &mut Vec<QuadPoint>) {
    let area = 0.5 * orient(a, b, c).abs();
    for &(bary, w) in triangle7() {
        let point = Point::new(
            bary[0] * a.x + bary[1] * b.x + bary[2] * c.x,
            bary[0] * a.y + bary[1] * b.y + bary[2] * c.y,
        );
        let weight = if l == 0.0 {
            w * area
        } else {
            w * area * point.norm().powf(l)
        };
        out.push(QuadPoint { point, weight });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        for k in 0..10 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(k));
            assert_relative_eq!(got, 1.0 / (k as f64 + 1.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn jacobi_integrates_weighted_monomials() {
        for &alpha in &[-0.5, -0.9, 0.0, 0.5, 1.0] {
            let rule = gauss_jacobi(4, alpha);
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 1.0 / (alpha + 1.0), max_relative = 1e-13);
            for k in 0..8 {
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k))
                    .sum();
                assert_relative_eq!(got, 1.0 / (alpha + k as f64 + 1.0), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn triangle_rule_is_degree_five() {
        // ∫_T x^i y^j over the unit right triangle = i! j! / (i + j + 2)!
        let fact = |n: u32| (1..=n).product::<u32>().max(1) as f64;
        let mut out = Vec::new();
        push_plain(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            0.0,
            &mut out,
        );
        for i in 0..=5u32 {
            for j in 0..=(5 - i) {
                let got: f64 = out
                    .iter()
                    .map(|q| q.weight * q.point.x.powi(i as i32) * q.point.y.powi(j as i32))
                    .sum();
                let exact = fact(i) * fact(j) / fact(i + j + 2);
                assert_relative_eq!(got, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn collapsed_rule_matches_sector_measure() {
        // triangle (0, (1,0), (1,1)) has weighted measure ∫_0^{π/4} (cos θ)^{-(l+2)} dθ / (l+2)
        let l = -1.0;
        let wq = WeightedQuadrature::new(l);
        let mut out = Vec::new();
        wq.push_triangle(Point::ORIGIN, Point::new(1.0, 0.0), Point::new(1.0, 1.0), &mut out);
        let got: f64 = out.iter().map(|q| q.weight).sum();
        // ∫_0^{π/4} sec θ dθ = ln(1 + √2)
        assert_relative_eq!(got, (1.0 + 2f64.sqrt()).ln(), max_relative = 1e-10);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |t: f64| 1.0 / ((t - 0.5).powi(2) + 1e-4);
        let got = adaptive_gauss(&f, 0.0, 1.0, gl7(), 1e-12);
        let exact = 2.0 * (0.5f64 / 1e-2).atan() / 1e-2;
        assert_relative_eq!(got, exact, max_relative = 1e-10);
    }
}
