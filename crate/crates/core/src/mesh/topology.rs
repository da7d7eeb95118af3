use super::{dist, Point, SpatialMesh};
use crate::error::{HdgError, Result};
use std::collections::HashMap;

/// One side of a face: the element and the local edge index (edge `j` is
/// the edge opposite local vertex `j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceSide {
    pub element: usize,
    pub local_edge: usize,
}

/// A mesh edge. `vertices` is sorted, and the face is parametrised as
/// `x(s) = v[0] + s (v[1] - v[0])` for `s` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: [usize; 2],
    /// Element with the lower index.
    pub left: FaceSide,
    pub right: Option<FaceSide>,
    /// Unit normal pointing out of `left` (towards `right`).
    pub normal: Point,
    pub length: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn sides(&self) -> impl Iterator<Item = FaceSide> + '_ {
        std::iter::once(self.left).chain(self.right)
    }
}

/// Interior/boundary face incidence of a conforming mesh.
#[derive(Debug, Clone)]
pub struct FaceTopology {
    faces: Vec<Face>,
    element_faces: Vec<[usize; 3]>,
    n_interior: usize,
}

impl FaceTopology {
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_boundary(&self) -> usize {
        self.faces.len() - self.n_interior
    }

    /// Face index of local edge `j` of element `k`.
    pub fn element_face(&self, k: usize, j: usize) -> usize {
        self.element_faces[k][j]
    }

    pub fn element_faces(&self, k: usize) -> [usize; 3] {
        self.element_faces[k]
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| !f.is_boundary())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| f.is_boundary())
    }

    pub fn skeleton_length(&self) -> f64 {
        self.faces.iter().map(|f| f.length).sum()
    }

    /// Outward unit normal of element `k` on its local edge `j`.
    pub fn outward_normal(&self, k: usize, j: usize) -> Point {
        let f = &self.faces[self.element_faces[k][j]];
        if f.left.element == k {
            f.normal
        } else {
            [-f.normal[0], -f.normal[1]]
        }
    }
}

/// Builds the face lists of a mesh. Faces are numbered in order of first
/// appearance when sweeping elements and their local edges, so the left
/// element of every interior face has the lower index.
pub fn build_face_topology(mesh: &SpatialMesh) -> Result<FaceTopology> {
    let tris = mesh.triangles();
    let verts = mesh.vertices();
    let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * tris.len());
    let mut faces: Vec<Face> = Vec::with_capacity(3 * tris.len() / 2 + 4);
    let mut element_faces = vec![[usize::MAX; 3]; tris.len()];
    for (k, t) in tris.iter().enumerate() {
        for j in 0..3 {
            let (p, q) = (t[(j + 1) % 3], t[(j + 2) % 3]);
            let key = (p.min(q), p.max(q));
            let side = FaceSide { element: k, local_edge: j };
            match index.get(&key) {
                None => {
                    let (a, b) = (verts[p], verts[q]);
                    let length = dist(a, b);
                    // counter-clockwise element: outward normal is the edge
                    // direction rotated clockwise
                    let normal = [(b[1] - a[1]) / length, -(b[0] - a[0]) / length];
                    index.insert(key, faces.len());
                    element_faces[k][j] = faces.len();
                    faces.push(Face { vertices: [key.0, key.1], left: side, right: None, normal, length });
                }
                Some(&f) => {
                    let face = &mut faces[f];
                    if face.right.is_some() {
                        return Err(HdgError::Topology(format!(
                            "edge ({}, {}) is shared by more than two elements",
                            key.0, key.1
                        )));
                    }
                    if face.left.element == k {
                        return Err(HdgError::Topology(format!("element {k} repeats edge ({}, {})", key.0, key.1)));
                    }
                    face.right = Some(side);
                    element_faces[k][j] = f;
                }
            }
        }
    }
    let n_interior = faces.iter().filter(|f| f.right.is_some()).count();
    Ok(FaceTopology { faces, element_faces, n_interior })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rectangle;

    #[test]
    fn two_triangle_square() {
        let m = SpatialMesh::build_uniform(1, Rectangle::unit_square()).unwrap();
        let t = build_face_topology(&m).unwrap();
        assert_eq!((t.n_interior(), t.n_boundary()), (1, 4));
        let perimeter_plus_diagonal = 4.0 + 2f64.sqrt();
        assert!((t.skeleton_length() - perimeter_plus_diagonal).abs() < 1e-14);
    }

    #[test]
    fn edge_count_matches_independent_enumeration() {
        // Independent count for the n x n diagonal mesh: horizontal edges
        // n(n+1), vertical n(n+1), diagonals n^2; boundary edges 4n.
        let n = 4;
        let m = SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap();
        let t = build_face_topology(&m).unwrap();
        assert_eq!(t.n_faces(), 2 * n * (n + 1) + n * n);
        assert_eq!(t.n_boundary(), 4 * n);
        // Euler: V - E + F = 1 for a disc (F = triangles).
        assert_eq!(m.n_vertices() as i64 - t.n_faces() as i64 + m.n_elements() as i64, 1);
    }

    #[test]
    fn normals_unit_and_opposite() {
        let m = SpatialMesh::build_uniform(3, Rectangle::unit_square()).unwrap();
        let t = build_face_topology(&m).unwrap();
        for f in t.faces() {
            assert!((f.normal[0].hypot(f.normal[1]) - 1.0).abs() < 1e-14);
            if let Some(r) = f.right {
                assert!(f.left.element < r.element);
                let nl = t.outward_normal(f.left.element, f.left.local_edge);
                let nr = t.outward_normal(r.element, r.local_edge);
                assert!((nl[0] + nr[0]).abs() < 1e-15 && (nl[1] + nr[1]).abs() < 1e-15);
            }
        }
        // Outward normals point away from the element centroid.
        for k in 0..m.n_elements() {
            let v = m.element_vertices(k);
            let c = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
            for j in 0..3 {
                let f = t.face(t.element_face(k, j));
                let a = m.vertices()[f.vertices[0]];
                let n = t.outward_normal(k, j);
                assert!((a[0] - c[0]) * n[0] + (a[1] - c[1]) * n[1] > 0.0);
            }
        }
    }

    #[test]
    fn three_elements_on_one_edge_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]];
        let tris = vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]];
        let m = SpatialMesh::new(v, tris).unwrap();
        assert!(matches!(build_face_topology(&m), Err(HdgError::Topology(_))));
    }
}
