use super::{FaceTopology, SpatialMesh};

/// Geometric quality report of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshMetrics {
    pub n_elements: usize,
    pub n_vertices: usize,
    pub n_interior_faces: usize,
    pub n_boundary_faces: usize,
    /// `h = max h_K`.
    pub h: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// `max h_K / rho_K`.
    pub shape_regularity: f64,
    /// `max h / h_K`.
    pub quasi_uniformity: f64,
    /// Lower face-equivalence constant `min h_F / h_K` over incident pairs.
    pub face_lower: f64,
    /// Upper face-equivalence constant `max h_F / h_K` over incident pairs.
    pub face_upper: f64,
    pub area: f64,
    pub skeleton_length: f64,
}

pub fn mesh_metrics(mesh: &SpatialMesh, faces: &FaceTopology) -> MeshMetrics {
    let geo: Vec<_> = (0..mesh.n_elements()).map(|k| mesh.geometry(k)).collect();
    let h_max = geo.iter().map(|g| g.diameter).fold(0.0, f64::max);
    let h_min = geo.iter().map(|g| g.diameter).fold(f64::INFINITY, f64::min);
    let shape_regularity = geo.iter().map(|g| g.shape_ratio()).fold(0.0, f64::max);
    let (mut face_lower, mut face_upper) = (f64::INFINITY, 0.0f64);
    for f in faces.faces() {
        for side in f.sides() {
            let r = f.length / geo[side.element].diameter;
            face_lower = face_lower.min(r);
            face_upper = face_upper.max(r);
        }
    }
    MeshMetrics {
        n_elements: mesh.n_elements(),
        n_vertices: mesh.n_vertices(),
        n_interior_faces: faces.n_interior(),
        n_boundary_faces: faces.n_boundary(),
        h: h_max,
        h_min,
        h_max,
        shape_regularity,
        quasi_uniformity: h_max / h_min,
        face_lower,
        face_upper,
        area: geo.iter().map(|g| g.area).sum(),
        skeleton_length: faces.skeleton_length(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_face_topology, Rectangle};

    #[test]
    fn right_triangle_inradius() {
        let m = SpatialMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let g = m.geometry(0);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        // incircle of a right triangle: r = (a + b - c) / 2
        assert!((g.inradius - (2.0 - 2f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_mesh_ratios() {
        let m = SpatialMesh::build_uniform(4, Rectangle::unit_square()).unwrap();
        let t = build_face_topology(&m).unwrap();
        let r = mesh_metrics(&m, &t);
        assert!((r.quasi_uniformity - 1.0).abs() < 1e-14);
        assert!((r.face_upper - 1.0).abs() < 1e-14);
        assert!((r.face_lower - 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ratios_invariant_under_refinement() {
        let m = SpatialMesh::build_uniform(2, Rectangle::unit_square()).unwrap();
        let r0 = mesh_metrics(&m, &build_face_topology(&m).unwrap());
        let fine = m.refine_uniform();
        let r1 = mesh_metrics(&fine, &build_face_topology(&fine).unwrap());
        assert!((r0.shape_regularity - r1.shape_regularity).abs() < 1e-12);
        assert!((r0.quasi_uniformity - r1.quasi_uniformity).abs() < 1e-12);
        assert!((r0.face_lower - r1.face_lower).abs() < 1e-12);
        assert!((r0.face_upper - r1.face_upper).abs() < 1e-12);
        assert!((r1.h / r0.h - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rigid_motion_invariance() {
        let m = SpatialMesh::build_uniform(3, Rectangle::unit_square()).unwrap();
        let r0 = mesh_metrics(&m, &build_face_topology(&m).unwrap());
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let moved = m.map_vertices(|p| [c * p[0] - s * p[1] + 2.5, s * p[0] + c * p[1] - 1.0]).unwrap();
        let r1 = mesh_metrics(&moved, &build_face_topology(&moved).unwrap());
        for (a, b) in [
            (r0.h, r1.h),
            (r0.shape_regularity, r1.shape_regularity),
            (r0.quasi_uniformity, r1.quasi_uniformity),
            (r0.face_lower, r1.face_lower),
            (r0.face_upper, r1.face_upper),
            (r0.area, r1.area),
        ] {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
