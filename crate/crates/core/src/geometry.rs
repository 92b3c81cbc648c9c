//! Weighted measure `|Ω|_l = ∫_Ω |x|^l dx` and weighted perimeter
//! `P_{l/2}(Ω) = ∫_{∂Ω} |x|^{l/2} dH¹` of polygons, the disk of equal
//! weighted measure and the two-weight isoperimetric ratio.
//!
//! Areas are computed as a signed fan from the origin. For the fan triangle
//! spanned by an edge `AB`, the radial factor integrates in closed form and
//! leaves
//!
//! ```text
//!   (A × B) / (l + 2) · ∫_0^1 |A + t (B - A)|^l dt
//! ```
//!
//! which is evaluated by adaptive Gauss quadrature. Signs make the formula
//! valid for non-convex polygons and for polygons not containing the origin.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{segment_distance, Point};
use crate::quadrature::{adaptive_gauss, adaptive_gauss_abs, gl16, gl7};

const AREA_TOL: f64 = 1e-10;
const EDGE_TOL: f64 = 1e-10;

/// Position-dependent Robin multiplier `β(x)`.
pub type RobinFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// The data `(Ω, l, β)` of the Robin problem: a simple counterclockwise
/// polygon containing the origin, the weight exponent and the Robin
/// parameter.
#[derive(Clone)]
pub struct WeightedDomain {
    vertices: Vec<Point>,
    l: f64,
    beta: f64,
    beta_fn: Option<RobinFn>,
}

impl fmt::Debug for WeightedDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedDomain")
            .field("vertices", &self.vertices.len())
            .field("l", &self.l)
            .field("beta", &self.beta)
            .field("variable_beta", &self.beta_fn.is_some())
            .finish()
    }
}

impl WeightedDomain {
    /// Validates the polygon and the parameters. Clockwise input is
    /// reversed.
    pub fn new(vertices: Vec<Point>, l: f64, beta: f64) -> Result<Self> {
        let mut vertices = vertices;
        validate_parameters(l, beta)?;
        validate_polygon(&mut vertices)?;
        Ok(Self {
            vertices,
            l,
            beta,
            beta_fn: None,
        })
    }

    pub fn from_shape(shape: &Shape, l: f64, beta: f64) -> Result<Self> {
        Self::new(shape.vertices(), l, beta)
    }

    /// Attaches a variable Robin multiplier: the boundary term becomes
    /// `β(x) |x|^{l/2}` with `β(x)` given by `beta_fn`. It must stay
    /// bounded below by a positive constant along the boundary.
    pub fn with_beta_fn(mut self, beta_fn: RobinFn) -> Result<Self> {
        let n = self.vertices.len();
        let mut lower = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            for k in 0..=8 {
                let v = beta_fn(a.lerp(b, k as f64 / 8.0));
                if !v.is_finite() {
                    return Err(Error::Argument("β(x) must be finite on ∂Ω".into()));
                }
                lower = lower.min(v);
            }
        }
        if lower <= 0.0 {
            return Err(Error::Argument(format!(
                "β(x) must be bounded below by a positive constant (found {lower})"
            )));
        }
        self.beta_fn = Some(beta_fn);
        Ok(self)
    }

    /// Same polygon and Robin data, different weight exponent.
    pub fn with_l(&self, l: f64) -> Result<Self> {
        validate_parameters(l, self.beta)?;
        Ok(Self { l, ..self.clone() })
    }

    /// Same polygon and exponent, different constant Robin parameter.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        validate_parameters(self.l, beta)?;
        Ok(Self {
            beta,
            ..self.clone()
        })
    }

    /// The polygon dilated by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::Argument("scale factor must be positive".into()));
        }
        Ok(Self {
            vertices: self.vertices.iter().map(|&p| p * factor).collect(),
            ..self.clone()
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_fn(&self) -> Option<&RobinFn> {
        self.beta_fn.as_ref()
    }

    /// Robin coefficient `β(x)` at a boundary point.
    pub fn beta_at(&self, p: Point) -> f64 {
        match &self.beta_fn {
            Some(f) => f(p),
            None => self.beta,
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    pub fn min_edge_length(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].distance(self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from the origin to the boundary.
    pub fn origin_clearance(&self) -> f64 {
        origin_clearance(&self.vertices)
    }

    /// Point-in-polygon test by winding number; points on the boundary
    /// count as outside.
    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(&self.vertices, p)
    }
}

fn validate_parameters(l: f64, beta: f64) -> Result<()> {
    if !(l > -2.0 && l <= 0.0) {
        return Err(Error::Argument(format!("weight exponent l = {l} outside (-2, 0]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Argument(format!("Robin parameter β = {beta} must be positive")));
    }
    Ok(())
}

fn validate_polygon(vertices: &mut Vec<Point>) -> Result<()> {
    if vertices.len() >= 2 && vertices.first() == vertices.last() {
        vertices.pop();
    }
    let n = vertices.len();
    if n < 3 {
        return Err(Error::Domain(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::Domain("non-finite vertex coordinate".into()));
    }
    let area2: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
    if area2 == 0.0 {
        return Err(Error::Domain("degenerate polygon with zero area".into()));
    }
    if area2 < 0.0 {
        vertices.reverse();
    }
    for i in 0..n {
        if vertices[i].distance(vertices[(i + 1) % n]) == 0.0 {
            return Err(Error::Domain(format!("repeated vertex at index {i}")));
        }
    }
    // O(n^2) pairwise segment test; fine for polygon inputs
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::Domain(format!(
                    "polygon is not simple: edges {i} and {j} intersect"
                )));
            }
        }
    }
    if !point_in_polygon(vertices, Point::ORIGIN) {
        return Err(Error::Domain("the origin must lie strictly inside the polygon".into()));
    }
    if origin_clearance(vertices) <= 0.0 {
        return Err(Error::Domain("the origin lies on the boundary".into()));
    }
    Ok(())
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    use crate::point::orient;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

pub(crate) fn origin_clearance(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| segment_distance(Point::ORIGIN, vertices[i], vertices[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn point_in_polygon(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    let mut winding = 0i32;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if segment_distance(p, a, b) == 0.0 {
            return false;
        }
        let side = crate::point::orient(a, b, p);
        if a.y <= p.y {
            if b.y > p.y && side > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && side < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Signed weighted measure `∫ |x|^l dx` of a closed polygon (positive when
/// counterclockwise). The polygon need not contain the origin; edges
/// collinear with the origin contribute nothing.
pub fn polygon_weighted_area(vertices: &[Point], l: f64) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        total += fan_term(vertices[i], vertices[(i + 1) % n], l);
    }
    total
}

/// Weighted measure of the fan triangle `(0, a, b)`, signed by orientation.
pub(crate) fn fan_term(a: Point, b: Point, l: f64) -> f64 {
    let cross = a.cross(b);
    if cross == 0.0 {
        return 0.0;
    }
    if l == 0.0 {
        return 0.5 * cross;
    }
    let d = b - a;
    let f = |t: f64| (a + d * t).norm().powf(l);
    if is_far(a, b) {
        return cross / (l + 2.0) * gl16().integrate(0.0, 1.0, f);
    }
    cross / (l + 2.0) * adaptive_gauss(&f, 0.0, 1.0, gl16(), AREA_TOL)
}

/// A segment short against its distance from the origin, where one
/// 16-point Gauss rule is exact to round-off for `|x|^l` type integrands.
fn is_far(a: Point, b: Point) -> bool {
    a.distance(b) <= 0.25 * segment_distance(Point::ORIGIN, a, b)
}

/// `∫_P (g0 + g·x) |x|^l dx` over a closed polygon, signed like
/// [`polygon_weighted_area`]. Exact up to the edge quadrature tolerance.
pub fn polygon_weighted_linear(vertices: &[Point], l: f64, g0: f64, g: Point) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        let cross = a.cross(b);
        if cross == 0.0 {
            continue;
        }
        if l == 0.0 {
            total += cross * (g0 / 2.0 + g.dot(a + b) / 6.0);
            continue;
        }
        // collapsed map x = s·(a + t(b - a)): the radial factor integrates exactly
        let d = b - a;
        let f = |t: f64| {
            let x = a + d * t;
            x.norm().powf(l) * (g0 / (l + 2.0) + g.dot(x) / (l + 3.0))
        };
        if is_far(a, b) {
            total += cross * gl16().integrate(0.0, 1.0, f);
            continue;
        }
        let (ra, rb) = (a.norm(), b.norm());
        let scale = (g0.abs() + g.norm() * ra.max(rb)) * ra.min(rb).powf(l);
        total += cross * adaptive_gauss_abs(&f, 0.0, 1.0, gl16(), AREA_TOL, 1e-3 * AREA_TOL * scale);
    }
    total
}

/// `∫_{[a,b]} |x|^exponent dH¹` along a straight segment.
pub fn segment_weighted_length(a: Point, b: Point, exponent: f64) -> f64 {
    let len = a.distance(b);
    if len == 0.0 {
        return 0.0;
    }
    if exponent == 0.0 {
        return len;
    }
    let d = b - a;
    let f = |t: f64| (a + d * t).norm().powf(exponent);
    len * adaptive_gauss(&f, 0.0, 1.0, gl7(), EDGE_TOL)
}

/// `|Ω|_l = ∫_Ω |x|^l dx`.
pub fn weighted_area(domain: &WeightedDomain) -> Result<f64> {
    ensure_origin_inside(domain)?;
    Ok(polygon_weighted_area(&domain.vertices, domain.l))
}

/// `P_{l/2}(Ω) = ∫_{∂Ω} |x|^{l/2} dH¹`.
pub fn weighted_perimeter(domain: &WeightedDomain) -> Result<f64> {
    ensure_origin_inside(domain)?;
    let v = &domain.vertices;
    let n = v.len();
    Ok((0..n)
        .map(|i| segment_weighted_length(v[i], v[(i + 1) % n], 0.5 * domain.l))
        .sum())
}

/// `P_{l/2}(Ω)^2 / (2π (l + 2) |Ω|_l)`, at least one for every admissible
/// domain and equal to one only for disks centred at the origin.
pub fn isoperimetric_ratio(domain: &WeightedDomain) -> Result<f64> {
    let area = weighted_area(domain)?;
    let perimeter = weighted_perimeter(domain)?;
    Ok(perimeter * perimeter / (isoperimetric_constant(domain.l) * area))
}

/// The constant `2π (l + 2)`.
pub fn isoperimetric_constant(l: f64) -> f64 {
    2.0 * PI * (l + 2.0)
}

fn ensure_origin_inside(domain: &WeightedDomain) -> Result<()> {
    if !(domain.origin_clearance() > 0.0) || !point_in_polygon(&domain.vertices, Point::ORIGIN) {
        return Err(Error::Domain("origin outside or on the boundary".into()));
    }
    Ok(())
}

/// The disk `Ω^♯` centred at the origin with the same weighted measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedDisk {
    pub radius: f64,
    pub l: f64,
    pub beta: f64,
    pub weighted_measure: f64,
}

impl SymmetrizedDisk {
    /// `|D_r|_l = 2π r^{l+2} / (l + 2)`.
    pub fn measure_of_radius(&self, r: f64) -> f64 {
        disk_measure(r, self.l)
    }

    /// Inverse of [`Self::measure_of_radius`].
    pub fn radius_of_measure(&self, s: f64) -> f64 {
        disk_radius(s, self.l)
    }

    /// `P_{l/2}(Ω^♯) = 2π R^{(l+2)/2}`.
    pub fn perimeter(&self) -> f64 {
        2.0 * PI * self.radius.powf(0.5 * (self.l + 2.0))
    }

    /// Robin coefficient on `∂Ω^♯`: `β R^{l/2}`.
    pub fn robin_coefficient(&self) -> f64 {
        self.beta * self.radius.powf(0.5 * self.l)
    }
}

pub(crate) fn disk_measure(r: f64, l: f64) -> f64 {
    2.0 * PI * r.powf(l + 2.0) / (l + 2.0)
}

pub(crate) fn disk_radius(s: f64, l: f64) -> f64 {
    ((l + 2.0) * s.max(0.0) / (2.0 * PI)).powf(1.0 / (l + 2.0))
}

/// `r^♯ = ((l + 2) |Ω|_l / 2π)^{1/(l+2)}`.
pub fn symmetrized_disk(measure: f64, l: f64, beta: f64) -> Result<SymmetrizedDisk> {
    if !(measure > 0.0 && measure.is_finite()) {
        return Err(Error::Argument(format!("weighted measure must be positive, got {measure}")));
    }
    validate_parameters(l, beta)?;
    let radius = disk_radius(measure, l);
    Ok(SymmetrizedDisk {
        radius,
        l,
        beta,
        weighted_measure: measure,
    })
}

/// Named polygons used by the drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `[-1, 1]^2`
    Square,
    /// `[-w/2, w/2] × [-h/2, h/2]`
    Rectangle { width: f64, height: f64 },
    /// regular polygon inscribed in the circle of radius `radius`
    RegularNgon { sides: usize, radius: f64 },
    /// `[-1, 1]^2 \ ([0, 1] × [-1, 0])` translated by `(0.25, -0.25)`
    LShape,
    /// explicit vertex list
    Polygon(Vec<Point>),
}

impl Shape {
    /// Regular 1024-gon of radius one, the polygonal stand-in for the unit disk.
    pub fn disk() -> Self {
        Shape::RegularNgon {
            sides: 1024,
            radius: 1.0,
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        match self {
            Shape::Square => rectangle(2.0, 2.0),
            Shape::Rectangle { width, height } => rectangle(*width, *height),
            Shape::RegularNgon { sides, radius } => (0..*sides)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / *sides as f64;
                    Point::new(radius * th.cos(), radius * th.sin())
                })
                .collect(),
            Shape::LShape => [
                (-1.0, -1.0),
                (0.0, -1.0),
                (0.0, 0.0),
                (1.0, 0.0),
                (1.0, 1.0),
                (-1.0, 1.0),
            ]
            .iter()
            .map(|&(x, y)| Point::new(x + 0.25, y - 0.25))
            .collect(),
            Shape::Polygon(v) => v.clone(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Shape::Square => "square".into(),
            Shape::Rectangle { width, height } => format!("rectangle:{width}:{height}"),
            Shape::RegularNgon { sides, radius } => format!("ngon:{sides}:{radius}"),
            Shape::LShape => "lshape".into(),
            Shape::Polygon(v) => format!("polygon:{}", v.len()),
        }
    }
}

fn rectangle(width: f64, height: f64) -> Vec<Point> {
    let (a, b) = (0.5 * width, 0.5 * height);
    vec![
        Point::new(-a, -b),
        Point::new(a, -b),
        Point::new(a, b),
        Point::new(-a, b),
    ]
}

/// The comparison gallery: square, rectangle, regular 64-gon and L-shape.
pub fn gallery() -> Vec<Shape> {
    vec![
        Shape::Square,
        Shape::Rectangle {
            width: 3.0,
            height: 1.0,
        },
        Shape::RegularNgon {
            sides: 64,
            radius: 1.0,
        },
        Shape::LShape,
    ]
}

impl FromStr for Shape {
    type Err = Error;

    /// Accepts `square`, `rectangle[:w:h]`, `ngon:n:r` (also
    /// `regular-ngon n r`), `lshape` and `disk`. Separators may be `:` or
    /// whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .split(|c: char| c == ':' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parse(format!("shape `{s}` is missing parameter {i}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("shape `{s}`: {e}")))
        };
        match parts.first().map(|p| p.to_ascii_lowercase()).as_deref() {
            Some("square") => Ok(Shape::Square),
            Some("rectangle") | Some("rect") => {
                if parts.len() == 1 {
                    Ok(Shape::Rectangle {
                        width: 3.0,
                        height: 1.0,
                    })
                } else {
                    Ok(Shape::Rectangle {
                        width: num(1)?,
                        height: num(2)?,
                    })
                }
            }
            Some("ngon") | Some("regular-ngon") => {
                let sides = num(1)?;
                if sides.fract() != 0.0 || sides < 3.0 {
                    return Err(Error::Parse(format!("shape `{s}`: need an integer n >= 3")));
                }
                let radius = if parts.len() > 2 { num(2)? } else { 1.0 };
                Ok(Shape::RegularNgon {
                    sides: sides as usize,
                    radius,
                })
            }
            Some("lshape") | Some("l-shape") => Ok(Shape::LShape),
            Some("disk") => Ok(Shape::disk()),
            _ => Err(Error::Parse(format!("unknown shape `{s}`"))),
        }
    }
}

/// Parses a plain-text vertex list: one `x y` pair per line, blank lines
/// and `#` comments ignored.
pub fn parse_vertices(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Parse(format!(
                "line {}: expected `x y`, got `{line}`",
                lineno + 1
            )));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        out.push(Point::new(parse(fields[0])?, parse(fields[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(l: f64) -> WeightedDomain {
        WeightedDomain::from_shape(&Shape::Square, l, 1.0).unwrap()
    }

    #[test]
    fn square_unweighted() {
        let d = square(0.0);
        assert_relative_eq!(weighted_area(&d).unwrap(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(weighted_perimeter(&d).unwrap(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(isoperimetric_ratio(&d).unwrap(), 4.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn symmetrized_radius_examples() {
        assert_relative_eq!(symmetrized_disk(PI, 0.0, 1.0).unwrap().radius, 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            symmetrized_disk(4.0, 0.0, 1.0).unwrap().radius,
            (4.0 / PI).sqrt(),
            max_relative = 1e-14
        );
        let disk = symmetrized_disk(7.05099, -1.0, 1.0).unwrap();
        assert!((disk.radius - 1.12219).abs() < 1e-5);
        let back = disk.measure_of_radius(disk.radius);
        assert_relative_eq!(back, disk.weighted_measure, max_relative = 1e-12);
    }

    #[test]
    fn nonpositive_measure_is_rejected() {
        assert!(matches!(symmetrized_disk(0.0, 0.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(symmetrized_disk(-1.0, -1.0, 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn origin_must_be_interior() {
        let shifted = vec![
            Point::new(0.0, -1.0),
            Point::new(2.0, -1.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert!(matches!(WeightedDomain::new(shifted, 0.0, 1.0), Err(Error::Domain(_))));
        let outside = vec![Point::new(1.0, 1.0), Point::new(2.0, 1.0), Point::new(2.0, 2.0)];
        assert!(matches!(WeightedDomain::new(outside, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn self_intersecting_polygon_is_rejected() {
        let bowtie = vec![
            Point::new(-1.0, -1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, -1.0),
            Point::new(-1.0, 1.0),
        ];
        assert!(matches!(WeightedDomain::new(bowtie, 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn parameters_are_checked() {
        let v = Shape::Square.vertices();
        assert!(WeightedDomain::new(v.clone(), -2.0, 1.0).is_err());
        assert!(WeightedDomain::new(v.clone(), 0.5, 1.0).is_err());
        assert!(WeightedDomain::new(v, 0.0, 0.0).is_err());
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let mut v = Shape::Square.vertices();
        v.reverse();
        let d = WeightedDomain::new(v, 0.0, 1.0).unwrap();
        assert_relative_eq!(weighted_area(&d).unwrap(), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn lshape_contains_origin_with_clearance() {
        let d = WeightedDomain::from_shape(&Shape::LShape, 0.0, 1.0).unwrap();
        assert_relative_eq!(d.origin_clearance(), 0.25 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(weighted_area(&d).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("square".parse::<Shape>().unwrap(), Shape::Square);
        assert_eq!(
            "ngon:1024:1".parse::<Shape>().unwrap(),
            Shape::RegularNgon { sides: 1024, radius: 1.0 }
        );
        assert_eq!(
            "regular-ngon 64 0.5".parse::<Shape>().unwrap(),
            Shape::RegularNgon { sides: 64, radius: 0.5 }
        );
        assert_eq!(
            "rectangle 2 1".parse::<Shape>().unwrap(),
            Shape::Rectangle { width: 2.0, height: 1.0 }
        );
        assert!("triangle".parse::<Shape>().is_err());
        assert!("ngon:2:1".parse::<Shape>().is_err());
    }

    #[test]
    fn vertex_file_parsing() {
        let text = "# unit square\n-1 -1\n1 -1\n\n1 1\n-1 1\n";
        let v = parse_vertices(text).unwrap();
        assert_eq!(v.len(), 4);
        assert!(parse_vertices("1 2 3").is_err());
        assert!(parse_vertices("1 x").is_err());
    }

    #[test]
    fn variable_beta_must_be_positive() {
        let d = square(0.0);
        assert!(d.clone().with_beta_fn(Arc::new(|p: Point| 1.0 + p.x * p.x)).is_ok());
        assert!(d.with_beta_fn(Arc::new(|p: Point| p.x)).is_err());
    }
}
