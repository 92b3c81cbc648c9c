//! Distribution functions and decreasing rearrangements with respect to the
//! measure `|x|^l dx`, and the weighted Schwarz symmetrization
//! `u^♯(x) = u*(2π |x|^{l+2} / (l + 2))`.
//!
//! For finite element fields the super-level sets `{|u| > t}` are clipped
//! exactly from the linear interpolant on every triangle and measured with
//! the fan quadrature of [`crate::geometry`]. Source functions are
//! rearranged from their samples at the weighted quadrature nodes.
//!
//! A distribution curve is a monotone polyline in the `(t, μ)` plane. A
//! level listed twice encodes a jump of `μ` (a plateau of the function):
//! the first entry holds `|{|u| ≥ t}|_l`, the second `|{|u| > t}|_l`. The
//! rearrangement is the same polyline read from the `μ` axis.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{FemField, WeightedRules};
use crate::geometry::{
    disk_measure, disk_radius, polygon_weighted_area, polygon_weighted_linear, WeightedDomain,
};
use crate::mesh::{refine, triangulate, TriangleMesh};
use crate::point::Point;
use crate::quadrature::gauss_legendre;

/// Default number of quantile-spaced levels.
pub const DEFAULT_LEVELS: usize = 512;
/// Deviation of `μ` from linearity, relative to `|Ω|_l`, that triggers a
/// midpoint level.
const REFINE_TOL: f64 = 1e-5;
const REFINE_ROUNDS: usize = 6;
/// Relative slack of the Hardy-Littlewood check.
pub const HARDY_LITTLEWOOD_TOL: f64 = 1e-6;

/// Sampled distribution function `μ(t) = |{|u| > t}|_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCurve {
    /// nondecreasing; a repeated level marks a jump of `μ`
    pub levels: Vec<f64>,
    /// nonincreasing
    pub values: Vec<f64>,
    pub total_measure: f64,
}

impl DistributionCurve {
    /// `μ(t)`, right-continuous; `μ = |Ω|_l` below the first level.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.levels.len();
        if n == 0 {
            return 0.0;
        }
        if t < self.levels[0] {
            return self.total_measure;
        }
        // last index with level <= t
        let k = self.levels.partition_point(|&x| x <= t);
        if k >= n {
            return self.values[n - 1];
        }
        let (t0, t1) = (self.levels[k - 1], self.levels[k]);
        let (m0, m1) = (self.values[k - 1], self.values[k]);
        if t1 == t0 {
            return m1;
        }
        m0 + (m1 - m0) * (t - t0) / (t1 - t0)
    }

    pub fn max_level(&self) -> f64 {
        self.levels.last().copied().unwrap_or(0.0)
    }

    /// Both tables are monotone (checked exactly).
    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| w[0] <= w[1])
            && self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// CSV with header `t,mu`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,mu")?;
        for (t, m) in self.levels.iter().zip(&self.values) {
            writeln!(w, "{t},{m}")?;
        }
        Ok(())
    }

    fn push(&mut self, t: f64, mu: f64) {
        // keep the table exactly monotone against round-off
        let mu = match self.values.last() {
            Some(&prev) => mu.min(prev),
            None => mu,
        };
        self.levels.push(t);
        self.values.push(mu.max(0.0));
    }
}

/// Decreasing rearrangement `u*(s) = inf{t ≥ 0 : μ(t) < s}` on `[0, |Ω|_l]`,
/// piecewise linear between breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementProfile {
    /// nondecreasing; a repeated breakpoint marks a jump of `u*`
    pub breakpoints: Vec<f64>,
    /// nonincreasing
    pub values: Vec<f64>,
    pub total_measure: f64,
}

impl RearrangementProfile {
    /// Profile of a constant function.
    pub fn constant(value: f64, total_measure: f64) -> Self {
        Self {
            breakpoints: vec![0.0, total_measure],
            values: vec![value, value],
            total_measure,
        }
    }

    /// `u*(s)`; at a jump the upper value is returned, as the infimum in
    /// the definition prescribes.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.breakpoints.len();
        if n == 0 {
            return 0.0;
        }
        let j = self.breakpoints.partition_point(|&x| x < s);
        if j == 0 {
            return self.values[0];
        }
        if j >= n {
            return self.values[n - 1];
        }
        let (s0, s1) = (self.breakpoints[j - 1], self.breakpoints[j]);
        let (u0, u1) = (self.values[j - 1], self.values[j]);
        if s1 == s {
            return u1;
        }
        u0 + (u1 - u0) * (s - s0) / (s1 - s0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn is_monotone(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0] <= w[1])
            && self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// `∫_0^{upper} u*(s)^p ds`, exact on every linear piece for `p ∈ {1, 2}`.
    pub fn integral_pow(&self, p: f64, upper: f64) -> f64 {
        let upper = upper.min(self.total_measure);
        let gl = gauss_legendre(4);
        let mut total = 0.0;
        for j in 1..self.breakpoints.len() {
            let s0 = self.breakpoints[j - 1];
            if s0 >= upper {
                break;
            }
            let s1 = self.breakpoints[j].min(upper);
            if s1 <= s0 {
                continue;
            }
            let full = self.breakpoints[j] - s0;
            let u0 = self.values[j - 1];
            let u1 = self.values[j - 1] + (self.values[j] - self.values[j - 1]) * (s1 - s0) / full;
            total += if p == 1.0 {
                0.5 * (u0 + u1) * (s1 - s0)
            } else if p == 2.0 {
                (u0 * u0 + u0 * u1 + u1 * u1) / 3.0 * (s1 - s0)
            } else {
                gl.integrate(0.0, 1.0, |x| (u0 + (u1 - u0) * x).abs().powf(p)) * (s1 - s0)
            };
        }
        total
    }

    /// `‖u*‖_{L^p(0, |Ω|_l)}`
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.integral_pow(p, self.total_measure).powf(1.0 / p)
    }

    /// CSV with header `s,u_star`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,u_star")?;
        for (s, u) in self.breakpoints.iter().zip(&self.values) {
            writeln!(w, "{s},{u}")?;
        }
        Ok(())
    }
}

/// Quantile-spaced levels of `values` (absolute values), always including
/// the minimum and the maximum.
pub fn quantile_levels(values: &[f64], n_levels: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return Vec::new();
    }
    let n = sorted.len();
    let count = n_levels.max(2);
    let mut levels: Vec<f64> = (0..count)
        .map(|k| {
            let idx = ((k as f64) * (n - 1) as f64 / (count - 1) as f64).round() as usize;
            sorted[idx.min(n - 1)]
        })
        .collect();
    levels.dedup();
    levels
}

/// Distribution function of a P1 field at `n_levels` quantile-spaced
/// levels of its nodal values, with midpoint levels added where `μ` is
/// visibly curved (near extrema and on coarse meshes).
pub fn distribution_function(field: &FemField, l: f64, n_levels: usize) -> DistributionCurve {
    let levels = quantile_levels(&field.values, n_levels);
    let mut curve = distribution_at_levels(field, l, &levels);
    let tol = REFINE_TOL * curve.total_measure;
    let mut intervals: Vec<(f64, f64)> = levels
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    for _ in 0..REFINE_ROUNDS {
        if intervals.is_empty() {
            break;
        }
        let mids: Vec<f64> = intervals
            .iter()
            .map(|&(a, b)| 0.5 * (a + b))
            .filter(|&m| curve.levels.binary_search_by(|x| x.total_cmp(&m)).is_err())
            .collect();
        let probe = distribution_at_levels(field, l, &mids);
        let mut next = Vec::new();
        for &(a, b) in &intervals {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                continue;
            }
            if (probe.eval(m) - curve.eval(m)).abs() > tol {
                next.push((a, m));
                next.push((m, b));
            }
        }
        curve = merge_curves(&curve, &probe);
        intervals = next;
    }
    curve
}

/// Union of two exact samplings of the same distribution function.
fn merge_curves(a: &DistributionCurve, b: &DistributionCurve) -> DistributionCurve {
    let mut out = DistributionCurve {
        levels: Vec::with_capacity(a.levels.len() + b.levels.len()),
        values: Vec::with_capacity(a.levels.len() + b.levels.len()),
        total_measure: a.total_measure,
    };
    let (mut i, mut j) = (0, 0);
    while i < a.levels.len() || j < b.levels.len() {
        let take_a = j >= b.levels.len() || (i < a.levels.len() && a.levels[i] <= b.levels[j]);
        if take_a {
            out.push(a.levels[i], a.values[i]);
            i += 1;
        } else {
            out.push(b.levels[j], b.values[j]);
            j += 1;
        }
    }
    out
}

/// Distribution function of a P1 field at the given ascending levels.
pub fn distribution_at_levels(field: &FemField, l: f64, levels: &[f64]) -> DistributionCurve {
    let mesh = &field.mesh;
    let nl = levels.len();
    // strict (> t) and non-strict (>= t) measures per level
    let mut above = vec![0.0; nl];
    let mut above_eq = vec![0.0; nl];
    // difference array: full triangle measure for every level below the triangle's range
    let mut full_diff = vec![0.0; nl + 1];
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let verts = mesh.vertices(t);
        let tri = mesh.triangles[t];
        let vals = tri.map(|i| field.values[i]);
        let measure = polygon_weighted_area(&verts, l);
        total += measure;
        let sign_change = vals.iter().any(|&v| v > 0.0) && vals.iter().any(|&v| v < 0.0);
        let lo = if sign_change {
            0.0
        } else {
            vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
        };
        let hi = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let first = levels.partition_point(|&x| x < lo);
        let last = levels.partition_point(|&x| x <= hi);
        full_diff[0] += measure;
        full_diff[first] -= measure;
        for k in first..last {
            let level = levels[k];
            let (gt, ge) = clipped_measures(&verts, vals, level, l, measure);
            above[k] += gt;
            above_eq[k] += ge;
        }
    }
    let mut running = 0.0;
    for k in 0..nl {
        running += full_diff[k];
        above[k] += running;
        above_eq[k] += running;
    }
    let mut curve = DistributionCurve {
        levels: Vec::with_capacity(2 * nl),
        values: Vec::with_capacity(2 * nl),
        total_measure: total,
    };
    for k in 0..nl {
        if above_eq[k] - above[k] > 1e-14 * total {
            curve.push(levels[k], above_eq[k]);
        }
        curve.push(levels[k], above[k]);
    }
    curve
}

/// Weighted measures of `{|u| > t}` and `{|u| ≥ t}` inside one triangle.
fn clipped_measures(verts: &[Point; 3], vals: [f64; 3], t: f64, l: f64, full: f64) -> (f64, f64) {
    if vals.iter().all(|&v| v.abs() == t) && vals.iter().all(|&v| v == vals[0]) {
        return (0.0, full);
    }
    let pos = clip_measure(verts, vals, t, l, full);
    // for t = 0 this is {u < 0}
    let neg = clip_measure(verts, vals.map(|v| -v), t, l, full);
    let gt = (pos + neg).min(full);
    // the level set of a non-constant linear function has measure zero
    let constant = vals.iter().all(|&v| v == vals[0]) && vals[0].abs() >= t;
    let ge = if constant || t == 0.0 { full } else { gt };
    (gt, ge)
}

/// Weighted measure of `{u > t}` in a triangle with linear `u`.
fn clip_measure(verts: &[Point; 3], vals: [f64; 3], t: f64, l: f64, full: f64) -> f64 {
    let d = vals.map(|v| v - t);
    if d.iter().all(|&x| x > 0.0) {
        return full;
    }
    if d.iter().all(|&x| x <= 0.0) {
        return 0.0;
    }
    let poly = clip_polygon(verts, d);
    if poly.len() < 3 {
        return 0.0;
    }
    polygon_weighted_area(&poly, l).clamp(0.0, full)
}

/// Part of the triangle where the linear interpolant of `d` is positive.
fn clip_polygon(verts: &[Point; 3], d: [f64; 3]) -> Vec<Point> {
    if d.iter().all(|&x| x > 0.0) {
        return verts.to_vec();
    }
    let mut poly: Vec<Point> = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (p, q) = (verts[i], verts[j]);
        let (dp, dq) = (d[i], d[j]);
        if dp > 0.0 {
            poly.push(p);
        }
        if (dp > 0.0) != (dq > 0.0) {
            let s = dp / (dp - dq);
            poly.push(p.lerp(q, s));
        }
    }
    poly
}

/// Generalized inverse of a distribution curve.
pub fn decreasing_rearrangement(curve: &DistributionCurve) -> RearrangementProfile {
    let total = curve.total_measure;
    let mut breakpoints = Vec::with_capacity(curve.levels.len() + 2);
    let mut values = Vec::with_capacity(curve.levels.len() + 2);
    let n = curve.levels.len();
    if n == 0 {
        return RearrangementProfile::constant(0.0, total);
    }
    if curve.values[n - 1] > 0.0 {
        breakpoints.push(0.0);
        values.push(curve.levels[n - 1]);
    }
    for k in (0..n).rev() {
        breakpoints.push(curve.values[k].min(total));
        values.push(curve.levels[k]);
    }
    if curve.values[0] < total {
        breakpoints.push(total);
        values.push(curve.levels[0]);
    }
    RearrangementProfile {
        breakpoints,
        values,
        total_measure: total,
    }
}

/// Decreasing rearrangement of a P1 field.
pub fn rearrange_field(field: &FemField, l: f64, n_levels: usize) -> RearrangementProfile {
    decreasing_rearrangement(&distribution_function(field, l, n_levels))
}

/// Weighted Schwarz symmetrization evaluated at `x`.
pub fn schwarz_value(profile: &RearrangementProfile, x: Point, l: f64) -> Result<f64> {
    let radius = disk_radius(profile.total_measure, l);
    let r = x.norm();
    if r > radius * (1.0 + 1e-9) {
        return Err(Error::OutsideDisk {
            distance: r,
            radius,
        });
    }
    let s = disk_measure(r, l).min(profile.total_measure);
    Ok(profile.eval(s))
}

/// Rearrangement of a source function sampled at the weighted quadrature
/// nodes of `rules`.
pub fn rearranged_source_on<F: Fn(Point) -> f64>(
    rules: &WeightedRules,
    num_triangles: usize,
    f: F,
    n_levels: usize,
) -> Result<RearrangementProfile> {
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(rules.num_points());
    for t in 0..num_triangles {
        for q in rules.points(t) {
            let v = f(q.point);
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeSource {
                    value: v,
                    x: q.point.x,
                    y: q.point.y,
                });
            }
            samples.push((v, q.weight));
        }
    }
    Ok(decreasing_rearrangement(&sample_distribution(&samples, n_levels)))
}

/// Distribution of a weighted sample `(value, weight)`.
pub fn sample_distribution(samples: &[(f64, f64)], n_levels: usize) -> DistributionCurve {
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|s| s.1).sum();
    // suffix sums: weight of samples with index >= k
    let mut suffix = vec![0.0; sorted.len() + 1];
    for k in (0..sorted.len()).rev() {
        suffix[k] = suffix[k + 1] + sorted[k].1;
    }
    let values: Vec<f64> = sorted.iter().map(|s| s.0).collect();
    let levels = quantile_levels(&values, n_levels);
    let mut curve = DistributionCurve {
        levels: Vec::with_capacity(2 * levels.len()),
        values: Vec::with_capacity(2 * levels.len()),
        total_measure: total,
    };
    for &t in &levels {
        let ge = suffix[values.partition_point(|&v| v < t)];
        let gt = suffix[values.partition_point(|&v| v <= t)];
        if ge - gt > 1e-14 * total {
            curve.push(t, ge);
        }
        curve.push(t, gt);
    }
    curve
}

/// Lebesgue distribution of a piecewise linear function of one variable
/// given by `(breakpoints, values)`; a repeated breakpoint is a jump. Exact
/// at every breakpoint value, linear in between.
pub fn piecewise_linear_distribution(breakpoints: &[f64], values: &[f64]) -> DistributionCurve {
    let n = breakpoints.len().min(values.len());
    let total = if n > 0 { breakpoints[n - 1] - breakpoints[0] } else { 0.0 };
    let mut levels: Vec<f64> = values[..n].iter().map(|v| v.abs()).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut curve = DistributionCurve {
        levels: Vec::with_capacity(2 * levels.len()),
        values: Vec::with_capacity(2 * levels.len()),
        total_measure: total,
    };
    let measure = |t: f64, strict: bool| -> f64 {
        let mut m = 0.0;
        for j in 1..n {
            let len = breakpoints[j] - breakpoints[j - 1];
            if len <= 0.0 {
                continue;
            }
            let (a, b) = (values[j - 1].abs(), values[j].abs());
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let inside = |v: f64| if strict { v > t } else { v >= t };
            m += if inside(lo) {
                len
            } else if !inside(hi) {
                0.0
            } else {
                len * (hi - t) / (hi - lo)
            };
        }
        m
    };
    for &t in &levels {
        let (ge, gt) = (measure(t, false), measure(t, true));
        if ge - gt > 1e-14 * total {
            curve.push(t, ge);
        }
        curve.push(t, gt);
    }
    curve
}

/// Rearrangement `f*` of a nonnegative source over `domain`, sampled on a
/// fine graded mesh.
pub fn rearranged_source<F: Fn(Point) -> f64>(
    f: F,
    domain: &WeightedDomain,
    l: f64,
    n_levels: usize,
) -> Result<RearrangementProfile> {
    let h = (domain.diameter() / 24.0).min(0.5 * domain.min_edge_length().max(1e-3));
    let mesh = refine(&triangulate(domain, h)?);
    let rules = WeightedRules::new(&mesh, l);
    rearranged_source_on(&rules, mesh.num_triangles(), f, n_levels)
}

/// Outcome of the Hardy-Littlewood inequality
/// `∫_E |u| |x|^l dx ≤ ∫_0^{|E|_l} u*(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyLittlewood {
    pub lhs: f64,
    pub rhs: f64,
    pub subset_measure: f64,
    pub pass: bool,
}

/// Exact partial integrals of `u*` for a P1 field through the layer-cake
/// identity
///
/// ```text
///   ∫_0^m u*(s) ds = min_t [ m t + ∫_Ω (|u| - t)_+ |x|^l dx ],
/// ```
///
/// whose minimum sits at `t = u*(m)`. Every term is an integral of a linear
/// function over a clipped triangle, so no level table is involved.
#[derive(Debug, Clone)]
pub struct LayerCake {
    field: FemField,
    l: f64,
    /// `|T|_l`
    measure: Vec<f64>,
    /// `∫_T |u| |x|^l dx`
    integral: Vec<f64>,
    /// range of `|u|` on `T`
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// `u = g0 + g·x` on `T`
    linear: Vec<(f64, Point)>,
    /// ascending levels starting at 0, with `μ` at each, to bracket `u*(m)`
    table: Vec<(f64, f64)>,
}

impl LayerCake {
    pub fn new(field: &FemField, l: f64) -> Self {
        let mesh = &field.mesh;
        let nt = mesh.num_triangles();
        let mut cake = Self {
            field: field.clone(),
            l,
            measure: Vec::with_capacity(nt),
            integral: Vec::with_capacity(nt),
            lo: Vec::with_capacity(nt),
            hi: Vec::with_capacity(nt),
            linear: Vec::with_capacity(nt),
            table: Vec::new(),
        };
        for t in 0..nt {
            let verts = mesh.vertices(t);
            let vals = mesh.triangles[t].map(|i| field.values[i]);
            let (a, b, c) = (verts[0], verts[1], verts[2]);
            let (e1, e2) = (b - a, c - a);
            let det = e1.cross(e2);
            let (d1, d2) = (vals[1] - vals[0], vals[2] - vals[0]);
            let g = Point::new((d1 * e2.y - d2 * e1.y) / det, (d2 * e1.x - d1 * e2.x) / det);
            let g0 = vals[0] - g.dot(a);
            let sign_change = vals.iter().any(|&v| v > 0.0) && vals.iter().any(|&v| v < 0.0);
            let lo = if sign_change {
                0.0
            } else {
                vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
            };
            let hi = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
            cake.measure.push(polygon_weighted_area(&verts, l));
            cake.linear.push((g0, g));
            cake.lo.push(lo);
            cake.hi.push(hi);
            cake.integral.push(0.0);
            let whole = if sign_change {
                cake.clipped(t, 0.0).1
            } else {
                polygon_weighted_linear(&verts, l, g0, g).abs()
            };
            cake.integral[t] = whole;
        }
        let mut levels = vec![0.0];
        levels.extend(quantile_levels(&field.values, DEFAULT_LEVELS).into_iter().filter(|&t| t > 0.0));
        let curve = distribution_at_levels(field, l, &levels);
        // keep μ(t) (the last entry of a repeated level)
        for (k, &t) in curve.levels.iter().enumerate() {
            if curve.levels.get(k + 1) != Some(&t) {
                cake.table.push((t, curve.values[k]));
            }
        }
        cake
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// `(|{|u| > t} ∩ T|_l, ∫_T (|u| - t)_+ |x|^l dx)`
    fn clipped(&self, t: usize, level: f64) -> (f64, f64) {
        if self.hi[t] <= level {
            return (0.0, 0.0);
        }
        if self.lo[t] >= level && self.integral[t] > 0.0 {
            return (self.measure[t], self.integral[t] - level * self.measure[t]);
        }
        let verts = self.field.mesh.vertices(t);
        let vals = self.field.mesh.triangles[t].map(|i| self.field.values[i]);
        let (g0, g) = self.linear[t];
        let mut measure = 0.0;
        let mut excess = 0.0;
        for sign in [1.0, -1.0] {
            let poly = clip_polygon(&verts, vals.map(|v| sign * v - level));
            if poly.len() >= 3 {
                measure += polygon_weighted_area(&poly, self.l);
                excess += polygon_weighted_linear(&poly, self.l, sign * g0 - level, g * sign);
            }
        }
        (measure.clamp(0.0, self.measure[t]), excess.max(0.0))
    }

    /// `(μ(t), ∫_Ω (|u| - t)_+ |x|^l dx)`
    pub fn level(&self, level: f64) -> (f64, f64) {
        let mut mu = 0.0;
        let mut excess = 0.0;
        for t in 0..self.measure.len() {
            let (m, e) = self.clipped(t, level);
            mu += m;
            excess += e;
        }
        (mu, excess)
    }

    /// `∫_0^m u*(s) ds`
    pub fn partial_integral(&self, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        let total_integral: f64 = self.integral.iter().sum();
        // μ(table[k-1]) > m ≥ μ(table[k])
        let k = self.table.partition_point(|&(_, mu)| mu > m);
        if k == 0 {
            return total_integral;
        }
        let (mut lo, mut hi) = (self.table[k - 1].0, self.table[k.min(self.table.len() - 1)].0);
        // triangles crossing the bracket are clipped; those above it are summed once
        let mut active = Vec::new();
        let (mut base_measure, mut base_integral) = (0.0, 0.0);
        for t in 0..self.measure.len() {
            if self.hi[t] <= lo {
                continue;
            }
            if self.lo[t] >= hi && self.integral[t] > 0.0 {
                base_measure += self.measure[t];
                base_integral += self.integral[t];
            } else {
                active.push(t);
            }
        }
        let eval = |level: f64| {
            let mut mu = base_measure;
            let mut excess = base_integral - level * base_measure;
            for &t in &active {
                let (a, e) = self.clipped(t, level);
                mu += a;
                excess += e;
            }
            (mu, excess)
        };
        // m t + E(t) is convex with slope m - μ(t), so the value at either end
        // of the bracket exceeds the minimum by at most (hi - lo)(μ(lo) - μ(hi))
        let (mut at_lo, mut at_hi) = (eval(lo), eval(hi));
        for _ in 0..200 {
            let bound = m * hi + at_hi.1;
            if (hi - lo) * (at_lo.0 - at_hi.0) <= 1e-11 * bound.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let at_mid = eval(mid);
            if at_mid.0 > m {
                lo = mid;
                at_lo = at_mid;
            } else {
                hi = mid;
                at_hi = at_mid;
            }
        }
        (m * lo + at_lo.1).min(m * hi + at_hi.1)
    }

    /// Hardy-Littlewood on the union of the triangles in `subset`.
    pub fn check(&self, subset: &[usize]) -> HardyLittlewood {
        let lhs: f64 = subset.iter().map(|&t| self.integral[t]).sum();
        let subset_measure: f64 = subset.iter().map(|&t| self.measure[t]).sum();
        let rhs = self.partial_integral(subset_measure);
        HardyLittlewood {
            lhs,
            rhs,
            subset_measure,
            pass: lhs <= rhs + HARDY_LITTLEWOOD_TOL * rhs.abs(),
        }
    }
}

/// Checks the Hardy-Littlewood inequality for a field on a union of
/// triangles `subset`.
pub fn hardy_littlewood_check(field: &FemField, subset: &[usize], l: f64) -> HardyLittlewood {
    LayerCake::new(field, l).check(subset)
}

/// Triangles whose nodal values all exceed `t`.
pub fn discrete_level_set(field: &FemField, t: f64) -> Vec<usize> {
    (0..field.mesh.num_triangles())
        .filter(|&k| field.mesh.triangles[k].iter().all(|&i| field.values[i] > t))
        .collect()
}

/// Convenience: a P1 field holding `g` on `mesh`.
pub fn interpolate(mesh: &Arc<TriangleMesh>, g: impl Fn(Point) -> f64) -> FemField {
    FemField::interpolate(mesh.clone(), g)
}
