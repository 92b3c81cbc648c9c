//! P1 finite elements for the weak form
//!
//! ```text
//!   ∫ ∇u·∇ψ dx + β ∫_{∂Ω} u ψ |x|^{l/2} dH¹ = ∫ f ψ |x|^l dx
//! ```
//!
//! and for the generalized eigenproblem `(K + βB) x = λ M x` whose smallest
//! eigenvalue minimizes the Rayleigh quotient
//! `(∫|∇u|² + β∫_{∂Ω} u²|x|^{l/2}) / ∫ u²|x|^l`.

use std::io::Write;
use std::sync::Arc;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::WeightedDomain;
use crate::mesh::TriangleMesh;
use crate::point::{orient, segment_distance, Point};
use crate::quadrature::{gauss_legendre, GaussRule, QuadPoint, WeightedQuadrature};
use crate::sparse::{conjugate_gradient, norm2, CsrMatrix};

/// Relative residual for the linear solves.
pub const CG_TOLERANCE: f64 = 1e-10;
/// Residual bound `‖(K + βB)x − λMx‖ / ‖x‖` for returned eigenpairs.
pub const EIGEN_TOLERANCE: f64 = 1e-8;
/// Inner solves of the inverse iteration; near the round-off floor of CG.
const INNER_TOLERANCE: f64 = 1e-11;
/// Stagnated inner solves below this relative residual are accepted.
const INNER_FALLBACK: f64 = 1e-8;

/// Nodal values of a continuous piecewise-linear function.
#[derive(Debug, Clone)]
pub struct FemField {
    pub mesh: Arc<TriangleMesh>,
    pub values: Vec<f64>,
}

impl FemField {
    pub fn new(mesh: Arc<TriangleMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::Argument(format!(
                "{} nodal values for a mesh with {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("field has non-finite values".into()));
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `g`.
    pub fn interpolate<G: Fn(Point) -> f64>(mesh: Arc<TriangleMesh>, g: G) -> Self {
        let values = mesh.nodes.iter().map(|&p| g(p)).collect();
        Self { mesh, values }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(∫_Ω |u|^p |x|^l dx)^{1/p}`
    pub fn weighted_lp_norm(&self, p: f64, rules: &WeightedRules) -> f64 {
        self.weighted_integral(rules, |u| u.abs().powf(p)).powf(1.0 / p)
    }

    /// `∫_Ω g(u(x)) |x|^l dx`
    pub fn weighted_integral<G: Fn(f64) -> f64>(&self, rules: &WeightedRules, g: G) -> f64 {
        self.weighted_integral_over(rules, 0..self.mesh.num_triangles(), g)
    }

    /// `∫_E g(u(x)) |x|^l dx` over a union of triangles.
    pub fn weighted_integral_over<G, I>(&self, rules: &WeightedRules, triangles: I, g: G) -> f64
    where
        G: Fn(f64) -> f64,
        I: IntoIterator<Item = usize>,
    {
        let mut total = 0.0;
        for t in triangles {
            let [i, j, k] = self.mesh.triangles[t];
            let (ui, uj, uk) = (self.values[i], self.values[j], self.values[k]);
            for (q, bary) in rules.points(t).iter().zip(rules.barycentric(t)) {
                let u = bary[0] * ui + bary[1] * uj + bary[2] * uk;
                total += q.weight * g(u);
            }
        }
        total
    }

    /// CSV with header `x,y,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,value")?;
        for (p, v) in self.mesh.nodes.iter().zip(&self.values) {
            writeln!(w, "{},{},{}", p.x, p.y, v)?;
        }
        Ok(())
    }
}

/// Weighted quadrature nodes for every triangle of a mesh, with the
/// barycentric coordinates of each node.
#[derive(Debug, Clone)]
pub struct WeightedRules {
    l: f64,
    offsets: Vec<usize>,
    points: Vec<QuadPoint>,
    bary: Vec<[f64; 3]>,
}

impl WeightedRules {
    pub fn new(mesh: &TriangleMesh, l: f64) -> Self {
        let builder = WeightedQuadrature::new(l);
        let mut offsets = Vec::with_capacity(mesh.num_triangles() + 1);
        let mut points = Vec::new();
        let mut bary = Vec::new();
        offsets.push(0);
        for t in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.vertices(t);
            let start = points.len();
            builder.push_triangle(a, b, c, &mut points);
            let det = orient(a, b, c);
            for q in &points[start..] {
                let p = q.point;
                let la = orient(p, b, c) / det;
                let lb = orient(a, p, c) / det;
                bary.push([la, lb, 1.0 - la - lb]);
            }
            offsets.push(points.len());
        }
        Self {
            l,
            offsets,
            points,
            bary,
        }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn points(&self, t: usize) -> &[QuadPoint] {
        &self.points[self.offsets[t]..self.offsets[t + 1]]
    }

    pub fn barycentric(&self, t: usize) -> &[[f64; 3]] {
        &self.bary[self.offsets[t]..self.offsets[t + 1]]
    }

    /// `∫_T |x|^l dx` of triangle `t` by this rule.
    pub fn triangle_measure(&self, t: usize) -> f64 {
        self.points(t).iter().map(|q| q.weight).sum()
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }
}

/// Element stiffness matrix of a P1 triangle.
pub fn element_stiffness(a: Point, b: Point, c: Point) -> Option<[[f64; 3]; 3]> {
    let area2 = orient(a, b, c);
    if !(area2 > 0.0) {
        return None;
    }
    // gradients of barycentric coordinates times 2|T|
    let g = [
        Point::new(b.y - c.y, c.x - b.x),
        Point::new(c.y - a.y, a.x - c.x),
        Point::new(a.y - b.y, b.x - a.x),
    ];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = g[i].dot(g[j]) / (2.0 * area2);
        }
    }
    Some(k)
}

/// `K_ij = ∫_Ω ∇φ_i · ∇φ_j dx`
pub fn assemble_stiffness(mesh: &TriangleMesh) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.vertices(t);
        let k = element_stiffness(a, b, c).ok_or(Error::Assembly {
            index: t,
            area: 0.5 * orient(a, b, c),
        })?;
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], k[i][j]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_nodes(), triplets))
}

/// `M_ij = ∫_Ω φ_i φ_j |x|^l dx`
pub fn assemble_weighted_mass(mesh: &TriangleMesh, l: f64) -> CsrMatrix {
    assemble_weighted_mass_with(mesh, &WeightedRules::new(mesh, l))
}

pub fn assemble_weighted_mass_with(mesh: &TriangleMesh, rules: &WeightedRules) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut m = [[0.0; 3]; 3];
        for (q, b) in rules.points(t).iter().zip(rules.barycentric(t)) {
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += q.weight * b[i] * b[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], m[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_nodes(), triplets)
}

/// `B_ij = ∫_{∂Ω} φ_i φ_j |x|^{l/2} (β(x)/β) dH¹`. With `beta_ratio = None`
/// the Robin parameter is constant.
pub fn assemble_boundary_mass(
    mesh: &TriangleMesh,
    l: f64,
    beta_ratio: Option<&dyn Fn(Point) -> f64>,
) -> CsrMatrix {
    let rule = gauss_legendre(7);
    let mut triplets = Vec::with_capacity(4 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [i, j] = e.nodes;
        let (a, b) = (mesh.nodes[i], mesh.nodes[j]);
        let m = edge_mass(a, b, l, beta_ratio, &rule);
        triplets.push((i, i, m[0][0]));
        triplets.push((i, j, m[0][1]));
        triplets.push((j, i, m[1][0]));
        triplets.push((j, j, m[1][1]));
    }
    CsrMatrix::from_triplets(mesh.num_nodes(), triplets)
}

fn edge_mass(
    a: Point,
    b: Point,
    l: f64,
    beta_ratio: Option<&dyn Fn(Point) -> f64>,
    rule: &GaussRule,
) -> [[f64; 2]; 2] {
    let len = a.distance(b);
    let mut m = [[0.0; 2]; 2];
    // split so every piece is short relative to its distance from the origin
    let mut pieces = vec![(0.0, 1.0)];
    let mut accepted = Vec::new();
    while let Some((t0, t1)) = pieces.pop() {
        let (p0, p1) = (a.lerp(b, t0), a.lerp(b, t1));
        if l == 0.0 || p0.distance(p1) <= 0.5 * segment_distance(Point::ORIGIN, p0, p1) || t1 - t0 < 1e-6
        {
            accepted.push((t0, t1));
        } else {
            let tm = 0.5 * (t0 + t1);
            pieces.push((tm, t1));
            pieces.push((t0, tm));
        }
    }
    for (t0, t1) in accepted {
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let t = t0 + (t1 - t0) * x;
            let p = a.lerp(b, t);
            let mut weight = w * (t1 - t0) * len;
            if l != 0.0 {
                weight *= p.norm().powf(0.5 * l);
            }
            if let Some(f) = beta_ratio {
                weight *= f(p);
            }
            let phi = [1.0 - t, t];
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] += weight * phi[r] * phi[c];
                }
            }
        }
    }
    m
}

/// `b_i = ∫_Ω f φ_i |x|^l dx`. Negative samples of `f` are reported with a
/// warning; the load is still assembled.
pub fn assemble_load<F: Fn(Point) -> f64>(mesh: &TriangleMesh, f: F, l: f64) -> Vec<f64> {
    assemble_load_with(mesh, &WeightedRules::new(mesh, l), f)
}

pub fn assemble_load_with<F: Fn(Point) -> f64>(
    mesh: &TriangleMesh,
    rules: &WeightedRules,
    f: F,
) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    let mut negative: Option<(f64, Point)> = None;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for (q, b) in rules.points(t).iter().zip(rules.barycentric(t)) {
            let fv = f(q.point);
            if fv < 0.0 && negative.is_none() {
                negative = Some((fv, q.point));
            }
            for k in 0..3 {
                load[tri[k]] += q.weight * fv * b[k];
            }
        }
    }
    if let Some((v, p)) = negative {
        warn!(
            "source takes the negative value {v} at ({}, {}); comparison results assume f >= 0",
            p.x, p.y
        );
    }
    load
}

/// Assembled operators of the Robin problem on one mesh.
#[derive(Debug, Clone)]
pub struct RobinSystem {
    pub mesh: Arc<TriangleMesh>,
    pub rules: WeightedRules,
    pub stiffness: CsrMatrix,
    pub boundary_mass: CsrMatrix,
    pub weighted_mass: CsrMatrix,
    pub beta: f64,
    /// `K + βB`
    pub operator: CsrMatrix,
}

impl RobinSystem {
    pub fn new(mesh: Arc<TriangleMesh>, domain: &WeightedDomain) -> Result<Self> {
        let l = domain.l();
        let beta = domain.beta();
        let stiffness = assemble_stiffness(&mesh)?;
        let boundary_mass = match domain.beta_fn() {
            Some(bf) => {
                let ratio = |p: Point| bf(p) / beta;
                assemble_boundary_mass(&mesh, l, Some(&ratio))
            }
            None => assemble_boundary_mass(&mesh, l, None),
        };
        let rules = WeightedRules::new(&mesh, l);
        let weighted_mass = assemble_weighted_mass_with(&mesh, &rules);
        let operator = stiffness.add_scaled(beta, &boundary_mass);
        Ok(Self {
            mesh,
            rules,
            stiffness,
            boundary_mass,
            weighted_mass,
            beta,
            operator,
        })
    }

    pub fn l(&self) -> f64 {
        self.rules.l()
    }

    pub fn load<F: Fn(Point) -> f64>(&self, f: F) -> Vec<f64> {
        assemble_load_with(&self.mesh, &self.rules, f)
    }

    pub fn solve<F: Fn(Point) -> f64>(&self, f: F) -> Result<FemField> {
        let b = self.load(f);
        let mut x = vec![0.0; b.len()];
        conjugate_gradient(&self.operator, &b, &mut x, CG_TOLERANCE)?;
        FemField::new(self.mesh.clone(), x)
    }

    /// Rayleigh quotient `x^T (K + βB) x / x^T M x`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        self.operator.bilinear(x, x) / self.weighted_mass.bilinear(x, x)
    }

    /// Smallest eigenpair by inverse power iteration from a positive start.
    pub fn smallest_eigenpair(&self) -> Result<EigenResult> {
        let n = self.mesh.num_nodes();
        let a = &self.operator;
        let m = &self.weighted_mass;
        let mut x = vec![1.0; n];
        let scale = m.bilinear(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= scale);
        let mut y = x.clone();
        let mut lambda = self.rayleigh_quotient(&x);
        let mut best = f64::INFINITY;
        let mut since_best = 0;
        for it in 1..=1000 {
            let mx = m.mul_vec(&x);
            match conjugate_gradient(a, &mx, &mut y, INNER_TOLERANCE) {
                // inexact inner solves are harmless; the outer residual decides
                Err(Error::Solver { residual, .. }) if residual <= INNER_FALLBACK => {}
                other => {
                    other?;
                }
            }
            let norm = m.bilinear(&y, &y).sqrt();
            x = y.iter().map(|v| v / norm).collect();
            lambda = self.rayleigh_quotient(&x);
            let res = self.residual(&x, lambda);
            if res <= 0.01 * EIGEN_TOLERANCE {
                return Ok(self.finish(x, lambda));
            }
            if res < 0.5 * best {
                best = res;
                since_best = 0;
            } else {
                since_best += 1;
            }
            if since_best > 25 {
                if best <= EIGEN_TOLERANCE {
                    return Ok(self.finish(x, lambda));
                }
                return Err(Error::Eigen {
                    iterations: it,
                    residual: res,
                });
            }
        }
        let res = self.residual(&x, lambda);
        if res <= EIGEN_TOLERANCE {
            return Ok(self.finish(x, lambda));
        }
        Err(Error::Eigen {
            iterations: 1000,
            residual: res,
        })
    }

    /// `‖(K + βB)x − λMx‖ / ‖x‖`
    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let ax = self.operator.mul_vec(x);
        let mx = self.weighted_mass.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(&mx).map(|(a, m)| a - lambda * m).collect();
        norm2(&r) / norm2(x)
    }

    fn finish(&self, mut x: Vec<f64>, _lambda: f64) -> EigenResult {
        let pivot = x
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let norm = self.weighted_mass.bilinear(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let lambda = self.rayleigh_quotient(&x);
        let residual = self.residual(&x, lambda);
        EigenResult {
            lambda,
            field: FemField {
                mesh: self.mesh.clone(),
                values: x,
            },
            residual,
        }
    }
}

/// First eigenpair, normalized so that `x^T M x = 1` and the entry of
/// largest modulus is positive.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    pub field: FemField,
    pub residual: f64,
}

/// Solves the Robin problem with source `f` on `mesh`.
pub fn solve_robin<F: Fn(Point) -> f64>(
    mesh: Arc<TriangleMesh>,
    domain: &WeightedDomain,
    f: F,
) -> Result<FemField> {
    RobinSystem::new(mesh, domain)?.solve(f)
}

/// Smallest eigenvalue of the weighted Robin eigenproblem on `mesh`.
pub fn smallest_eigenpair(mesh: Arc<TriangleMesh>, domain: &WeightedDomain) -> Result<EigenResult> {
    RobinSystem::new(mesh, domain)?.smallest_eigenpair()
}

/// Scalar summary of a solved field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FieldSummary {
    pub min: f64,
    pub max: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
}

impl FieldSummary {
    pub fn of(field: &FemField, rules: &WeightedRules) -> Self {
        Self {
            min: field.min(),
            max: field.max(),
            l1: field.weighted_lp_norm(1.0, rules),
            l2: field.weighted_lp_norm(2.0, rules),
        }
    }
}

/// Galerkin residual `‖b − (K + βB)x‖ / ‖b‖` of a solved field.
pub fn galerkin_residual(system: &RobinSystem, load: &[f64], field: &FemField) -> f64 {
    let ax = system.operator.mul_vec(&field.values);
    let r: Vec<f64> = load.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let bn = norm2(load);
    if bn == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / bn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{weighted_area, weighted_perimeter, Shape};
    use crate::mesh::{triangulate, BoundaryEdge};
    use approx::assert_relative_eq;

    fn single_triangle() -> TriangleMesh {
        TriangleMesh {
            nodes: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![
                BoundaryEdge { nodes: [0, 1], polygon_edge: 0 },
                BoundaryEdge { nodes: [1, 2], polygon_edge: 1 },
                BoundaryEdge { nodes: [2, 0], polygon_edge: 2 },
            ],
            h: 1.0,
            origin_node: 0,
        }
    }

    #[test]
    fn unit_right_triangle_stiffness() {
        let k = assemble_stiffness(&single_triangle()).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(k.get(i, j), expected[i][j], epsilon = 1e-15);
            }
            let row_sum: f64 = (0..3).map(|j| k.get(i, j)).sum();
            assert!(row_sum.abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_triangle_fails_assembly() {
        let mut mesh = single_triangle();
        mesh.nodes[2] = Point::new(2.0, 0.0);
        assert!(matches!(assemble_stiffness(&mesh), Err(Error::Assembly { index: 0, .. })));
    }

    #[test]
    fn unweighted_mass_is_classical() {
        let m = assemble_weighted_mass(&single_triangle(), 0.0);
        let area = 0.5;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 2.0 } else { 1.0 } * area / 12.0;
                assert_relative_eq!(m.get(i, j), e, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn straight_edge_boundary_mass() {
        let mesh = single_triangle();
        let b = assemble_boundary_mass(&mesh, 0.0, None);
        // edge (0,1) has length 1 and is shared by no other boundary edge at node pair
        assert_relative_eq!(b.get(0, 1), 1.0 / 6.0, epsilon = 1e-14);
        let len = 2f64.sqrt();
        assert_relative_eq!(b.get(1, 2), len / 6.0, epsilon = 1e-14);
        assert_relative_eq!(b.get(1, 1), 2.0 / 6.0 + 2.0 * len / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn mass_and_boundary_totals_match_geometry() {
        for &l in &[0.0, -0.5, -1.0, -1.5] {
            let d = WeightedDomain::from_shape(&Shape::LShape, l, 1.0).unwrap();
            let mesh = triangulate(&d, 0.2).unwrap();
            let ones = vec![1.0; mesh.num_nodes()];
            let m = assemble_weighted_mass(&mesh, l);
            let area = weighted_area(&d).unwrap();
            assert_relative_eq!(m.bilinear(&ones, &ones), area, max_relative = 1e-6);
            let b = assemble_boundary_mass(&mesh, l, None);
            let per = weighted_perimeter(&d).unwrap();
            assert_relative_eq!(b.bilinear(&ones, &ones), per, max_relative = 1e-6);
            let load = assemble_load(&mesh, |_| 1.0, l);
            assert_relative_eq!(load.iter().sum::<f64>(), area, max_relative = 1e-6);
        }
    }

    #[test]
    fn interior_rows_of_boundary_mass_vanish() {
        let d = WeightedDomain::from_shape(&Shape::Square, -1.0, 1.0).unwrap();
        let mesh = triangulate(&d, 0.3).unwrap();
        let b = assemble_boundary_mass(&mesh, -1.0, None);
        let on_boundary = mesh.is_boundary_node();
        for i in 0..mesh.num_nodes() {
            if !on_boundary[i] {
                assert_eq!(b.row(i).count(), 0);
            }
        }
        assert!(b.is_symmetric(1e-14));
    }

    #[test]
    fn load_is_linear_in_source() {
        let d = WeightedDomain::from_shape(&Shape::Square, -0.5, 1.0).unwrap();
        let mesh = triangulate(&d, 0.3).unwrap();
        let g = |p: Point| 1.0 + p.x.max(0.0);
        let b1 = assemble_load(&mesh, g, -0.5);
        let b3 = assemble_load(&mesh, |p| 3.0 * g(p), -0.5);
        for (u, v) in b1.iter().zip(&b3) {
            assert_relative_eq!(3.0 * u, v, max_relative = 1e-14);
        }
        assert!(assemble_load(&mesh, |_| 0.0, -0.5).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let d = WeightedDomain::from_shape(&Shape::Square, 0.0, 1.0).unwrap();
        let mesh = Arc::new(triangulate(&d, 0.3).unwrap());
        let u = solve_robin(mesh, &d, |_| 0.0).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
    }
}
