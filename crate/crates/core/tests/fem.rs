use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use robinsym::fem::{assemble_stiffness, galerkin_residual, RobinSystem};
use robinsym::prelude::*;

fn mesh_of(d: &WeightedDomain, h: f64) -> Arc<TriangleMesh> {
    Arc::new(triangulate(d, h).unwrap())
}

fn bessel_j(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -half * half / (k as f64 * (k + order) as f64);
        sum += term;
    }
    sum
}

#[test]
fn stiffness_reproduces_linear_energy() {
    let d = WeightedDomain::from_shape(&Shape::LShape, 0.0, 1.0).unwrap();
    let mesh = mesh_of(&d, 0.2);
    let k = assemble_stiffness(&mesh).unwrap();
    let ones = vec![1.0; mesh.num_nodes()];
    assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
    // u = 2x - 3y has energy |∇u|² |Ω| = 13 · 3
    let u: Vec<f64> = mesh.nodes.iter().map(|p| 2.0 * p.x - 3.0 * p.y).collect();
    assert_relative_eq!(k.bilinear(&u, &u), 39.0, max_relative = 1e-10);
}

#[test]
fn mass_matrices_integrate_constants() {
    for l in [0.0, -0.5, -1.0, -1.5] {
        let d = WeightedDomain::from_shape(&Shape::Square, l, 1.0).unwrap();
        let system = RobinSystem::new(mesh_of(&d, 0.2), &d).unwrap();
        let ones = vec![1.0; system.mesh.num_nodes()];
        let area = system.weighted_mass.bilinear(&ones, &ones);
        let perimeter = system.boundary_mass.bilinear(&ones, &ones);
        assert_relative_eq!(area, weighted_area(&d).unwrap(), max_relative = 1e-8);
        assert_relative_eq!(perimeter, weighted_perimeter(&d).unwrap(), max_relative = 1e-8);
    }
}

#[test]
fn disk_torsion_matches_closed_form() {
    let d = WeightedDomain::from_shape(&Shape::disk(), 0.0, 1.0).unwrap();
    let system = RobinSystem::new(mesh_of(&d, 0.1), &d).unwrap();
    let load = system.load(|_| 1.0);
    let u = system.solve(|_| 1.0).unwrap();
    assert!(galerkin_residual(&system, &load, &u) < 1e-9);
    let err = system
        .mesh
        .nodes
        .iter()
        .zip(&u.values)
        .map(|(p, v)| (v - (0.5 + 0.25 * (1.0 - p.norm_sq()))).abs())
        .fold(0.0, f64::max);
    assert!(err < 5e-3, "max error {err}");
    assert_relative_eq!(u.max(), 0.75, epsilon = 5e-3);
}

#[test]
fn larger_robin_parameter_lowers_the_solution() {
    let mut previous: Option<FemField> = None;
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let d = WeightedDomain::from_shape(&Shape::LShape, -0.5, beta).unwrap();
        let u = solve_robin(mesh_of(&d, 0.15), &d, |p: Point| 1.0 + p.x.max(0.0)).unwrap();
        assert!(u.min() > 0.0);
        if let Some(prev) = &previous {
            assert!(u.values.iter().zip(&prev.values).all(|(a, b)| a <= b));
        }
        previous = Some(u);
    }
}

#[test]
fn zero_source_gives_zero() {
    let d = WeightedDomain::from_shape(&Shape::Square, -1.0, 1.0).unwrap();
    let u = solve_robin(mesh_of(&d, 0.2), &d, |_| 0.0).unwrap();
    assert!(u.values.iter().all(|&v| v == 0.0));
}

#[test]
fn eigenpair_is_consistent() {
    let d = WeightedDomain::from_shape(&Shape::Square, -1.0, 2.0).unwrap();
    let system = RobinSystem::new(mesh_of(&d, 0.15), &d).unwrap();
    let e = system.smallest_eigenpair().unwrap();
    assert!(e.residual < 1e-8);
    assert_relative_eq!(system.rayleigh_quotient(&e.field.values), e.lambda, max_relative = 1e-12);
    assert!(e.field.values.iter().all(|&v| v > 0.0));
    // any other trial vector has a larger quotient
    for trial in [
        system.mesh.nodes.iter().map(|p| 2.0 - p.norm_sq()).collect::<Vec<_>>(),
        system.mesh.nodes.iter().map(|p| 1.0 + 0.3 * p.x).collect(),
    ] {
        assert!(system.rayleigh_quotient(&trial) >= e.lambda);
    }
}

#[test]
fn disk_eigenvalue_matches_bessel_root() {
    // first Robin eigenvalue of the unit disk, β = 1: k J1(k) = J0(k)
    let g = |k: f64| k * bessel_j(1, k) - bessel_j(0, k);
    let (mut lo, mut hi) = (0.5f64, 2.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    assert_relative_eq!(k, 1.2557836, epsilon = 1e-6);
    let d = WeightedDomain::from_shape(&Shape::disk(), 0.0, 1.0).unwrap();
    let e = smallest_eigenpair(mesh_of(&d, 0.1), &d).unwrap();
    assert_relative_eq!(e.lambda, k * k, max_relative = 1e-2);
    assert!(e.lambda > 0.0 && e.lambda < PI);
}
