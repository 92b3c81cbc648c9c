use std::f64::consts::PI;

use approx::assert_relative_eq;
use robinsym::geometry::gallery;
use robinsym::prelude::*;

fn square(l: f64) -> WeightedDomain {
    WeightedDomain::from_shape(&Shape::Square, l, 1.0).unwrap()
}

// Composite Simpson rule, kept independent of the library quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn square_without_weight() {
    let d = square(0.0);
    assert_relative_eq!(weighted_area(&d).unwrap(), 4.0, max_relative = 1e-12);
    assert_relative_eq!(weighted_perimeter(&d).unwrap(), 8.0, max_relative = 1e-12);
    assert_relative_eq!(isoperimetric_ratio(&d).unwrap(), 4.0 / PI, max_relative = 1e-10);
    let disk = symmetrized_disk(4.0, 0.0, 1.0).unwrap();
    // 2/√π = 1.128379...
    assert_relative_eq!(disk.radius, std::f64::consts::FRAC_2_SQRT_PI, max_relative = 1e-12);
}

#[test]
fn square_with_singular_weight() {
    let d = square(-1.0);
    // polar coordinates: 8 ∫_0^{π/4} sec θ dθ
    let area = 8.0 * (1.0 + 2f64.sqrt()).ln();
    assert_relative_eq!(weighted_area(&d).unwrap(), area, max_relative = 1e-9);
    // each half edge: ∫_0^1 (1 + y²)^{-1/4} dy
    let perimeter = 8.0 * simpson(|y| (1.0 + y * y).powf(-0.25), 0.0, 1.0, 2000);
    assert_relative_eq!(weighted_perimeter(&d).unwrap(), perimeter, max_relative = 1e-9);
    assert_relative_eq!(perimeter, 7.4999, epsilon = 1e-4);
    let disk = symmetrized_disk(area, -1.0, 1.0).unwrap();
    assert_relative_eq!(disk.radius, 1.12219, epsilon = 1e-5);
    let ratio = isoperimetric_ratio(&d).unwrap();
    assert_relative_eq!(ratio, perimeter * perimeter / (2.0 * PI * area), max_relative = 1e-9);
    assert_relative_eq!(ratio, 1.2697, epsilon = 1e-4);
}

#[test]
fn scaling_law() {
    for l in [0.0, -0.5, -1.0, -1.5] {
        let d = WeightedDomain::from_shape(&Shape::LShape, l, 1.0).unwrap();
        let t = 1.7;
        let s = d.scaled(t).unwrap();
        let a = weighted_area(&d).unwrap();
        let p = weighted_perimeter(&d).unwrap();
        assert_relative_eq!(weighted_area(&s).unwrap(), t.powf(l + 2.0) * a, max_relative = 1e-9);
        assert_relative_eq!(weighted_perimeter(&s).unwrap(), t.powf(1.0 + 0.5 * l) * p, max_relative = 1e-9);
        assert_relative_eq!(isoperimetric_ratio(&s).unwrap(), isoperimetric_ratio(&d).unwrap(), max_relative = 1e-9);
    }
}

#[test]
fn regular_polygons_decrease_to_the_disk() {
    for l in [0.0, -1.0, -1.5] {
        let ratios: Vec<f64> = [8, 32, 128, 512]
            .iter()
            .map(|&n| {
                let shape = Shape::RegularNgon { sides: n, radius: 1.0 };
                isoperimetric_ratio(&WeightedDomain::from_shape(&shape, l, 1.0).unwrap()).unwrap()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "l={l}: {ratios:?}");
        assert!(ratios[3] >= 1.0 && ratios[3] < 1.0 + 1e-4, "l={l}: {ratios:?}");
    }
}

#[test]
fn gallery_satisfies_the_inequality() {
    for l in [0.0, -0.5, -1.0, -1.5] {
        for shape in gallery() {
            let d = WeightedDomain::from_shape(&shape, l, 1.0).unwrap();
            assert!(isoperimetric_ratio(&d).unwrap() >= 1.0 - 1e-6, "{} l={l}", shape.name());
        }
    }
}

#[test]
fn rejects_bad_input() {
    assert!(WeightedDomain::from_shape(&Shape::Square, 0.5, 1.0).is_err());
    assert!(WeightedDomain::from_shape(&Shape::Square, -2.0, 1.0).is_err());
    assert!(WeightedDomain::from_shape(&Shape::Square, 0.0, 0.0).is_err());
    // origin outside
    let shifted = vec![
        Point::new(1.0, 1.0),
        Point::new(2.0, 1.0),
        Point::new(2.0, 2.0),
        Point::new(1.0, 2.0),
    ];
    assert!(WeightedDomain::new(shifted, 0.0, 1.0).is_err());
    assert!("ngon:2:1".parse::<Shape>().is_err());
    assert_eq!("ngon:6:2".parse::<Shape>().unwrap(), Shape::RegularNgon { sides: 6, radius: 2.0 });
}
