//! Conforming triangulations of a [`WeightedDomain`] graded toward the
//! origin, and uniform refinement.
//!
//! The initial mesh is a constrained Delaunay triangulation of the polygon
//! with the origin inserted as a node. Delaunay refinement (Ruppert/Chew,
//! provided by `spade`) keeps angles bounded while a sizing loop inserts the
//! centroids of triangles exceeding the local target size
//!
//! ```text
//!   size(r) = clamp(h · (r / diam)^{1/2}, h / 32, h)
//! ```
//!
//! where `r` is the distance of the centroid from the origin.

use std::collections::HashMap;
use std::io::Write;

use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, polygon_weighted_area, WeightedDomain};
use crate::point::{orient, segment_distance, Point};

/// Exponent of the size grading toward the origin.
pub const GRADING_EXPONENT: f64 = 0.5;
/// Ratio between the target size `h` and the smallest target size.
pub const GRADING_FLOOR: f64 = 32.0;
const ANGLE_LIMIT_DEG: f64 = 28.0;

/// A boundary edge, tagged with the index of the polygon edge it lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub polygon_edge: usize,
}

/// Conforming triangle mesh with counterclockwise triangles.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// target maximum edge length
    pub h: f64,
    /// index of the node placed at the origin
    pub origin_node: usize,
}

impl TriangleMesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Weighted measure `∫_T |x|^l dx` of triangle `t`.
    pub fn triangle_weighted_area(&self, t: usize, l: f64) -> f64 {
        polygon_weighted_area(&self.vertices(t), l)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| self.nodes[i].distance(self.nodes[j]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let v = self.vertices(t);
                (0..3)
                    .map(|k| {
                        let p = v[k];
                        let e1 = v[(k + 1) % 3] - p;
                        let e2 = v[(k + 2) % 3] - p;
                        e1.cross(e2).abs().atan2(e1.dot(e2)).to_degrees()
                    })
                    .fold(180.0, f64::min)
            })
            .fold(180.0, f64::min)
    }

    pub fn is_boundary_node(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            flags[e.nodes[0]] = true;
            flags[e.nodes[1]] = true;
        }
        flags
    }

    /// Checks positivity of all triangles, that interior edges are shared
    /// by exactly two triangles and that the edges owned by one triangle
    /// are exactly the boundary edges.
    pub fn check(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= self.nodes.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing node")));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!("triangle {t} has signed area {area:e}")));
            }
        }
        let mut count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                let key = (i.min(j), i.max(j));
                let entry = count.entry(key).or_insert((0, 0));
                if i < j {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        for (&key, &(fwd, bwd)) in &count {
            match (fwd, bwd) {
                (1, 1) => {}
                (1, 0) | (0, 1) => boundary.push(key),
                _ => {
                    return Err(Error::Mesh(format!(
                        "edge {key:?} is used {fwd}+{bwd} times; mesh is not conforming"
                    )))
                }
            }
        }
        let mut tagged: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
            .collect();
        boundary.sort_unstable();
        tagged.sort_unstable();
        if boundary != tagged {
            return Err(Error::Mesh(format!(
                "{} single-owner edges but {} tagged boundary edges",
                boundary.len(),
                tagged.len()
            )));
        }
        Ok(())
    }

    /// Plain-text dump with `nodes`, `triangles` and `boundary` sections.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "nodes {}", self.nodes.len())?;
        for p in &self.nodes {
            writeln!(w, "{:.17e} {:.17e}", p.x, p.y)?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "boundary {}", self.boundary_edges.len())?;
        for e in &self.boundary_edges {
            writeln!(w, "{} {} {}", e.nodes[0], e.nodes[1], e.polygon_edge)?;
        }
        Ok(())
    }
}

/// Target element size at distance `r` from the origin.
pub fn target_size(h: f64, diam: f64, r: f64) -> f64 {
    (h * (r / diam).powf(GRADING_EXPONENT)).clamp(h / GRADING_FLOOR, h)
}

/// Graded conforming triangulation of `domain` with maximum edge `h`.
pub fn triangulate(domain: &WeightedDomain, h: f64) -> Result<TriangleMesh> {
    let polygon = domain.vertices();
    let diam = domain.diameter();
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Argument(format!("mesh size h = {h} must be positive")));
    }
    if h > 0.5 * diam {
        return Err(Error::Argument(format!(
            "mesh size h = {h} too large for a domain of diameter {diam}"
        )));
    }

    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::new();
    let insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, p: Point| {
        cdt.insert(Point2::new(p.x, p.y))
            .map_err(|e| Error::Mesh(format!("cannot insert ({}, {}): {e:?}", p.x, p.y)))
    };
    let handles = polygon
        .iter()
        .map(|&p| insert(&mut cdt, p))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..handles.len() {
        let j = (i + 1) % handles.len();
        cdt.add_constraint(handles[i], handles[j]);
    }
    insert(&mut cdt, Point::ORIGIN)?;

    let max_area = 3f64.sqrt() / 4.0 * h * h;
    let budget = 200 * (((diam / h) * (diam / h)) as usize + polygon.len()) + 10_000;
    for _ in 0..64 {
        let params = RefinementParameters::<f64>::new()
            .exclude_outer_faces(true)
            .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(budget);
        let result = cdt.refine(params);
        if !result.refinement_complete {
            return Err(Error::Mesh("Delaunay refinement ran out of vertices".into()));
        }
        let mut oversized = Vec::new();
        for face in cdt.inner_faces() {
            let [a, b, c] = face.vertices().map(|v| {
                let p = v.position();
                Point::new(p.x, p.y)
            });
            let centroid = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
            if !point_in_polygon(polygon, centroid) {
                continue;
            }
            let longest = a.distance(b).max(b.distance(c)).max(c.distance(a));
            if longest > target_size(h, diam, centroid.norm()) {
                oversized.push(centroid);
            }
        }
        if oversized.is_empty() {
            return extract(&cdt, domain, h);
        }
        for p in oversized {
            insert(&mut cdt, p)?;
        }
    }
    Err(Error::Mesh("size grading did not converge".into()))
}

fn extract(
    cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>,
    domain: &WeightedDomain,
    h: f64,
) -> Result<TriangleMesh> {
    let polygon = domain.vertices();
    let mut raw: Vec<[usize; 3]> = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let pts = vs.map(|v| {
            let p = v.position();
            Point::new(p.x, p.y)
        });
        let centroid = Point::new(
            (pts[0].x + pts[1].x + pts[2].x) / 3.0,
            (pts[0].y + pts[1].y + pts[2].y) / 3.0,
        );
        if point_in_polygon(polygon, centroid) {
            raw.push(vs.map(|v| v.fix().index()));
        }
    }
    raw.sort_unstable();

    // compact node numbering in spade vertex order
    let mut used = vec![false; cdt.num_vertices()];
    for t in &raw {
        for &i in t {
            used[i] = true;
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut nodes = Vec::new();
    for (old, v) in cdt.vertices().enumerate() {
        if used[old] {
            remap[old] = nodes.len();
            let p = v.position();
            nodes.push(Point::new(p.x, p.y));
        }
    }
    let mut triangles: Vec<[usize; 3]> = raw.iter().map(|t| t.map(|i| remap[i])).collect();
    for t in &mut triangles {
        if orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }
    let origin_node = nodes
        .iter()
        .position(|p| p.x == 0.0 && p.y == 0.0)
        .ok_or_else(|| Error::Mesh("origin is not a mesh node".into()))?;
    let boundary_edges = collect_boundary(&nodes, &triangles, polygon)?;
    let mesh = TriangleMesh {
        nodes,
        triangles,
        boundary_edges,
        h,
        origin_node,
    };
    mesh.check()?;
    Ok(mesh)
}

fn collect_boundary(
    nodes: &[Point],
    triangles: &[[usize; 3]],
    polygon: &[Point],
) -> Result<Vec<BoundaryEdge>> {
    let mut owners: HashMap<(usize, usize), u32> = HashMap::new();
    for &[a, b, c] in triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            *owners.entry((i.min(j), i.max(j))).or_insert(0) += 1;
        }
    }
    let scale = polygon.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let n = polygon.len();
    let mut edges = Vec::new();
    // traverse triangles in order so boundary edges keep the triangle orientation
    for &[a, b, c] in triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            if owners[&(i.min(j), i.max(j))] != 1 {
                continue;
            }
            let (p, q) = (nodes[i], nodes[j]);
            let tag = (0..n).find(|&k| {
                let (u, v) = (polygon[k], polygon[(k + 1) % n]);
                segment_distance(p, u, v) <= tol && segment_distance(q, u, v) <= tol
            });
            match tag {
                Some(k) => edges.push(BoundaryEdge {
                    nodes: [i, j],
                    polygon_edge: k,
                }),
                None => {
                    return Err(Error::Mesh(format!(
                        "boundary edge ({}, {}) does not lie on the polygon",
                        i, j
                    )))
                }
            }
        }
    }
    Ok(edges)
}

/// Uniform refinement: every triangle is split into four congruent
/// children through its edge midpoints.
pub fn refine(mesh: &TriangleMesh) -> TriangleMesh {
    let mut nodes = mesh.nodes.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |i: usize, j: usize, nodes: &mut Vec<Point>| -> usize {
        let key = (i.min(j), i.max(j));
        *midpoints.entry(key).or_insert_with(|| {
            nodes.push(nodes[i].midpoint(nodes[j]));
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut nodes);
        let bc = midpoint(b, c, &mut nodes);
        let ca = midpoint(c, a, &mut nodes);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [i, j] = e.nodes;
        let m = midpoint(i, j, &mut nodes);
        boundary_edges.push(BoundaryEdge {
            nodes: [i, m],
            polygon_edge: e.polygon_edge,
        });
        boundary_edges.push(BoundaryEdge {
            nodes: [m, j],
            polygon_edge: e.polygon_edge,
        });
    }
    TriangleMesh {
        nodes,
        triangles,
        boundary_edges,
        h: 0.5 * mesh.h,
        origin_node: mesh.origin_node,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use approx::assert_relative_eq;

    fn domain(shape: Shape) -> WeightedDomain {
        WeightedDomain::from_shape(&shape, 0.0, 1.0).unwrap()
    }

    #[test]
    fn square_mesh_is_valid() {
        let mesh = triangulate(&domain(Shape::Square), 0.5).unwrap();
        assert!(mesh.num_triangles() >= 32);
        assert!((0..mesh.num_triangles()).all(|t| mesh.triangle_area(t) > 0.0));
        assert_eq!(mesh.nodes[mesh.origin_node], Point::ORIGIN);
        assert!(mesh.max_edge_length() <= 0.5 + 1e-12);
        assert_relative_eq!(mesh.total_area(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn ngon_area_partition() {
        let d = domain(Shape::RegularNgon { sides: 64, radius: 1.0 });
        let mesh = triangulate(&d, 0.2).unwrap();
        let exact = 0.5 * 64.0 * (2.0 * std::f64::consts::PI / 64.0).sin();
        assert!((mesh.total_area() - exact).abs() <= 1e-12);
    }

    #[test]
    fn grading_toward_origin() {
        let d = domain(Shape::Square);
        let h = 0.25;
        let mesh = triangulate(&d, h).unwrap();
        let diam = d.diameter();
        for t in 0..mesh.num_triangles() {
            let v = mesh.vertices(t);
            let c = Point::new((v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0);
            let longest = v[0].distance(v[1]).max(v[1].distance(v[2])).max(v[2].distance(v[0]));
            assert!(longest <= target_size(h, diam, c.norm()) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn refinement_quadruples() {
        let mesh = triangulate(&domain(Shape::LShape), 0.3).unwrap();
        let fine = refine(&mesh);
        assert_eq!(fine.num_triangles(), 4 * mesh.num_triangles());
        assert_eq!(fine.boundary_edges.len(), 2 * mesh.boundary_edges.len());
        assert_relative_eq!(fine.total_area(), mesh.total_area(), max_relative = 1e-13);
        fine.check().unwrap();
        assert_relative_eq!(fine.min_angle_deg(), mesh.min_angle_deg(), max_relative = 1e-9);
        for e in &fine.boundary_edges {
            let orig = mesh.boundary_edges.iter().any(|o| o.polygon_edge == e.polygon_edge);
            assert!(orig);
        }
    }

    #[test]
    fn oversized_h_is_rejected() {
        assert!(triangulate(&domain(Shape::Square), 5.0).is_err());
        assert!(triangulate(&domain(Shape::Square), 0.0).is_err());
    }

    #[test]
    fn text_dump_has_sections() {
        let mesh = triangulate(&domain(Shape::Square), 0.5).unwrap();
        let mut buf = Vec::new();
        mesh.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("nodes {}", mesh.num_nodes())));
        assert!(text.contains(&format!("triangles {}", mesh.num_triangles())));
        assert!(text.contains(&format!("boundary {}", mesh.boundary_edges.len())));
    }
}
