//! Simplicial spatial meshes and the space-time slab layout.

mod io;
mod layout;
mod metrics;
mod topology;

pub use io::{read_mesh, write_mesh, MESH_HEADER};
pub use layout::{Slab, SpaceTimeLayout};
pub use metrics::{mesh_metrics, MeshMetrics};
pub use topology::{build_face_topology, Face, FaceSide, FaceTopology};

use crate::error::{HdgError, Result};
use std::collections::HashMap;

pub type Point = [f64; 2];

/// Axis-aligned rectangle `[min.0, max.0] x [min.1, max.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub min: Point,
    pub max: Point,
}

impl Rectangle {
    pub fn unit_square() -> Self {
        Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }
}

impl Default for Rectangle {
    fn default() -> Self {
        Self::unit_square()
    }
}

/// Affine data of one triangle: `x = origin + jacobian * xi` maps the
/// reference triangle `(0,0), (1,0), (0,1)` onto the element.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub inverse_jacobian: [[f64; 2]; 2],
    /// `det J = 2 |K|`, positive for counter-clockwise triangles.
    pub det: f64,
    pub area: f64,
    /// Diameter (longest edge).
    pub diameter: f64,
    /// Inradius.
    pub inradius: f64,
}

impl ElementGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [v0, v1, v2] = vertices;
        let jacobian = [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let inverse_jacobian = [
            [jacobian[1][1] / det, -jacobian[0][1] / det],
            [-jacobian[1][0] / det, jacobian[0][0] / det],
        ];
        let edges = [dist(v1, v2), dist(v2, v0), dist(v0, v1)];
        let perimeter: f64 = edges.iter().sum();
        let area = 0.5 * det.abs();
        ElementGeometry {
            vertices,
            jacobian,
            inverse_jacobian,
            det,
            area,
            diameter: edges.iter().cloned().fold(0.0, f64::max),
            inradius: 2.0 * area / perimeter,
        }
    }

    pub fn map(&self, xi: Point) -> Point {
        let j = &self.jacobian;
        let o = self.vertices[0];
        [o[0] + j[0][0] * xi[0] + j[0][1] * xi[1], o[1] + j[1][0] * xi[0] + j[1][1] * xi[1]]
    }

    pub fn inverse_map(&self, x: Point) -> Point {
        let g = &self.inverse_jacobian;
        let d = [x[0] - self.vertices[0][0], x[1] - self.vertices[0][1]];
        [g[0][0] * d[0] + g[0][1] * d[1], g[1][0] * d[0] + g[1][1] * d[1]]
    }

    /// Physical gradient from a reference gradient: `J^{-T} grad_xi`.
    #[inline]
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let a = &self.inverse_jacobian;
        [a[0][0] * g[0] + a[1][0] * g[1], a[0][1] * g[0] + a[1][1] * g[1]]
    }

    /// Shape-regularity ratio `h_K / rho_K`.
    pub fn shape_ratio(&self) -> f64 {
        self.diameter / self.inradius
    }

    pub fn contains_reference(xi: Point, tol: f64) -> bool {
        xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// A conforming triangulation of a polygonal domain.
///
/// Triangles are stored counter-clockwise; the constructor reorients any
/// clockwise input and rejects degenerate triangles.
#[derive(Debug, Clone)]
pub struct SpatialMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
}

impl SpatialMesh {
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(HdgError::InvalidArgument("mesh has no triangles".into()));
        }
        for (k, t) in triangles.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(HdgError::InvalidArgument(format!(
                    "triangle {k} references a vertex out of range"
                )));
            }
            let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            let scale = dist(vertices[t[0]], vertices[t[1]]).max(dist(vertices[t[0]], vertices[t[2]]));
            if a.abs() <= 1e-14 * scale * scale {
                return Err(HdgError::InvalidArgument(format!("triangle {k} is degenerate")));
            }
            if a < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &triangles {
            for j in 0..3 {
                let (a, b) = (t[(j + 1) % 3], t[(j + 2) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for (&(a, b), &c) in &edge_count {
            if c == 1 {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }
        Ok(SpatialMesh { vertices, triangles, boundary_vertex })
    }

    /// Structured triangulation of a rectangle: `n x n` cells, each split
    /// along its lower-left to upper-right diagonal (`2 n^2` triangles).
    pub fn build_uniform(n: usize, domain: Rectangle) -> Result<Self> {
        if n == 0 {
            return Err(HdgError::InvalidArgument("subdivision count must be at least 1".into()));
        }
        if !(domain.max[0] > domain.min[0] && domain.max[1] > domain.min[1]) {
            return Err(HdgError::InvalidArgument("empty rectangle".into()));
        }
        let hx = (domain.max[0] - domain.min[0]) / n as f64;
        let hy = (domain.max[1] - domain.min[1]) / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let x = if i == n { domain.max[0] } else { domain.min[0] + i as f64 * hx };
                let y = if j == n { domain.max[1] } else { domain.min[1] + j as f64 * hy };
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(vertices, triangles)
    }

    /// Red refinement: every triangle is split into four through its edge
    /// midpoints.
    pub fn refine_uniform(&self) -> SpatialMesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let m01 = mid(t[0], t[1], &mut vertices);
            let m12 = mid(t[1], t[2], &mut vertices);
            let m20 = mid(t[2], t[0], &mut vertices);
            triangles.push([t[0], m01, m20]);
            triangles.push([m01, t[1], m12]);
            triangles.push([m20, m12, t[2]]);
            triangles.push([m01, m12, m20]);
        }
        Self::new(vertices, triangles).expect("refinement of a valid mesh is valid")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn element_vertices(&self, k: usize) -> [Point; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn geometry(&self, k: usize) -> ElementGeometry {
        ElementGeometry::new(self.element_vertices(k))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.geometry(k).area).sum()
    }

    /// Mesh size `h = max h_K`.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_elements()).map(|k| self.geometry(k).diameter).fold(0.0, f64::max)
    }

    /// Applies `f` to every vertex (used for rigid-motion checks).
    pub fn map_vertices(&self, f: impl Fn(Point) -> Point) -> Result<SpatialMesh> {
        Self::new(self.vertices.iter().map(|&p| f(p)).collect(), self.triangles.clone())
    }

    /// Element containing `x` (first match) and its reference coordinates.
    pub fn locate(&self, x: Point) -> Option<(usize, Point)> {
        (0..self.n_elements()).find_map(|k| {
            let g = self.geometry(k);
            let xi = g.inverse_map(x);
            ElementGeometry::contains_reference(xi, 1e-12).then_some((k, xi))
        })
    }

    /// Verifies conformity: every edge is shared by at most two triangles,
    /// no vertex lies in the interior of another triangle's edge, and the
    /// triangles exactly tile the region bounded by the boundary edges.
    pub fn check_conformity(&self) -> Result<()> {
        let faces = build_face_topology(self)?;
        let h = self.mesh_size();
        let tol = 1e-12 * h.max(1.0);
        // Hanging-node test, bucketed by a uniform grid over the bounding box.
        let (lo, hi) = self.bounding_box();
        let cells = ((self.n_vertices() as f64).sqrt().ceil() as usize).max(1);
        let cw = ((hi[0] - lo[0]) / cells as f64).max(f64::MIN_POSITIVE);
        let ch = ((hi[1] - lo[1]) / cells as f64).max(f64::MIN_POSITIVE);
        let cell_of = |p: Point| {
            let i = (((p[0] - lo[0]) / cw) as usize).min(cells - 1);
            let j = (((p[1] - lo[1]) / ch) as usize).min(cells - 1);
            (i, j)
        };
        let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (v, &p) in self.vertices.iter().enumerate() {
            buckets.entry(cell_of(p)).or_default().push(v);
        }
        for f in faces.faces() {
            let (a, b) = (self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
            let (c0, c1) = (cell_of([a[0].min(b[0]), a[1].min(b[1])]), cell_of([a[0].max(b[0]), a[1].max(b[1])]));
            for i in c0.0..=c1.0 {
                for j in c0.1..=c1.1 {
                    let Some(list) = buckets.get(&(i, j)) else { continue };
                    for &v in list {
                        if v == f.vertices[0] || v == f.vertices[1] {
                            continue;
                        }
                        let p = self.vertices[v];
                        let len = f.length;
                        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                        let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
                        if cross.abs() <= tol * len && t > 1e-12 && t < 1.0 - 1e-12 {
                            return Err(HdgError::Topology(format!(
                                "vertex {v} lies inside edge ({}, {})",
                                f.vertices[0], f.vertices[1]
                            )));
                        }
                    }
                }
            }
        }
        // The two elements of an interior face must lie on opposite sides.
        for f in faces.interior_faces() {
            let right = f.right.expect("interior face");
            let opposite = |side: &FaceSide| self.vertices[self.triangles[side.element][side.local_edge]];
            let (a, b) = (self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
            let sl = signed_area(a, b, opposite(&f.left));
            let sr = signed_area(a, b, opposite(&right));
            if sl * sr >= 0.0 {
                return Err(HdgError::Topology(format!(
                    "elements {} and {} overlap across edge ({}, {})",
                    f.left.element, right.element, f.vertices[0], f.vertices[1]
                )));
            }
        }
        // Area enclosed by the oriented boundary edges must equal the sum of
        // element areas (detects overlaps).
        let mut enclosed = 0.0;
        for f in faces.boundary_faces() {
            let t = self.triangles[f.left.element];
            let j = f.left.local_edge;
            let (p, q) = (self.vertices[t[(j + 1) % 3]], self.vertices[t[(j + 2) % 3]]);
            enclosed += 0.5 * (p[0] * q[1] - q[0] * p[1]);
        }
        let total = self.total_area();
        if (enclosed - total).abs() > 1e-12 * total {
            return Err(HdgError::Topology(format!(
                "element areas sum to {total} but the boundary encloses {enclosed}"
            )));
        }
        Ok(())
    }

    fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts() {
        let m = SpatialMesh::build_uniform(1, Rectangle::unit_square()).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices()), (2, 4));
        let m = SpatialMesh::build_uniform(2, Rectangle::unit_square()).unwrap();
        assert_eq!((m.n_elements(), m.n_vertices()), (8, 9));
        let m = SpatialMesh::build_uniform(4, Rectangle::unit_square()).unwrap();
        assert!((m.total_area() - 1.0).abs() <= 1e-14);
        assert!((m.mesh_size() - 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(
            SpatialMesh::build_uniform(0, Rectangle::unit_square()),
            Err(HdgError::InvalidArgument(_))
        ));
    }

    #[test]
    fn refinement_splits_and_halves() {
        let m = SpatialMesh::build_uniform(1, Rectangle::unit_square()).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.n_elements(), 8);
        assert!((r.mesh_size() / m.mesh_size() - 0.5).abs() <= 1e-14);
        assert!((r.total_area() - m.total_area()).abs() <= 1e-12);
        r.check_conformity().unwrap();
    }

    #[test]
    fn orientation_is_positive() {
        let m = SpatialMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]).unwrap();
        assert!(m.geometry(0).det > 0.0);
    }

    #[test]
    fn hanging_node_detected() {
        // Two triangles on the left share the midpoint of the right triangle's edge.
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [1.0, 0.5], [2.0, 0.5]];
        let t = vec![[0, 1, 3], [0, 3, 2], [1, 4, 2]];
        let m = SpatialMesh::new(v, t).unwrap();
        assert!(m.check_conformity().is_err());
    }

    #[test]
    fn overlapping_triangles_detected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]];
        let t = vec![[0, 1, 2], [0, 1, 3]];
        let m = SpatialMesh::new(v, t).unwrap();
        assert!(m.check_conformity().is_err());
    }

    #[test]
    fn locate_finds_containing_element() {
        let m = SpatialMesh::build_uniform(3, Rectangle::unit_square()).unwrap();
        let (k, xi) = m.locate([0.7, 0.2]).unwrap();
        let x = m.geometry(k).map(xi);
        assert!((x[0] - 0.7).abs() < 1e-14 && (x[1] - 0.2).abs() < 1e-14);
    }
}
