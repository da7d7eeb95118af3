//! Discrete spaces on a space-time slab.
//!
//! A [`Discretization`] bundles a mesh with its faces, element geometry and
//! reference tables. A [`SlabSpace`] is the DOF map of the four product
//! spaces on one slab; a [`DiscreteField`] holds the coefficients of a single
//! element or facet function.

mod conformity;
mod field;
mod norms;

pub use conformity::{conformity, Conformity};
pub use field::{DiscreteField, Evaluation, FaceTraces, FieldRole, VelocityPair};
pub use norms::{
    broken_gradient_norm_sq, integrated_l2_norm_sq, integrated_norm_1h_sq, integrated_norm_v_sq, l2_norm,
    mismatch_norm_sq, norm_1h, norm_v, slab_integral,
};

use crate::basis::{
    quadrature, simplex_dim, LegendreBasis, QuadratureDomain, QuadratureRule, ReferenceTables, SideTable,
    SPATIAL_DEGREES, TEMPORAL_DEGREES,
};
use crate::error::{HdgError, Result};
use crate::mesh::{build_face_topology, ElementGeometry, FaceTopology, Point, SpatialMesh};

/// One element side: the element, its local edge, the face it lies on and
/// whether the local edge runs against the face parametrisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementSide {
    pub element: usize,
    pub local_edge: usize,
    pub face: usize,
    pub flip: bool,
    /// Unit normal pointing out of `element`.
    pub normal: Point,
    pub length: f64,
}

/// Mesh, faces, geometry and reference tables for degrees `(k_s, k_t)`.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: SpatialMesh,
    faces: FaceTopology,
    geometry: Vec<ElementGeometry>,
    sides: Vec<[ElementSide; 3]>,
    tables: ReferenceTables,
    time_basis: LegendreBasis,
    time_rule: QuadratureRule,
    space: SlabSpace,
}

impl Discretization {
    /// Default quadrature: exactness `3 k_s + 2` in space and `3 k_t + 2` in
    /// time.
    pub fn new(mesh: SpatialMesh, ks: usize, kt: usize) -> Result<Self> {
        Self::with_quadrature(mesh, ks, kt, 3 * ks + 2, 3 * kt + 2)
    }

    pub fn with_quadrature(
        mesh: SpatialMesh,
        ks: usize,
        kt: usize,
        space_exactness: usize,
        time_exactness: usize,
    ) -> Result<Self> {
        if !SPATIAL_DEGREES.contains(&ks) {
            return Err(HdgError::InvalidArgument(format!(
                "spatial degree {ks} outside the supported range {}..={}",
                SPATIAL_DEGREES.start(),
                SPATIAL_DEGREES.end()
            )));
        }
        if !TEMPORAL_DEGREES.contains(&kt) {
            return Err(HdgError::InvalidArgument(format!(
                "temporal degree {kt} outside the supported range {}..={}",
                TEMPORAL_DEGREES.start(),
                TEMPORAL_DEGREES.end()
            )));
        }
        let faces = build_face_topology(&mesh)?;
        let geometry: Vec<ElementGeometry> = (0..mesh.n_elements()).map(|k| mesh.geometry(k)).collect();
        let sides = (0..mesh.n_elements())
            .map(|k| {
                let tri = mesh.triangles()[k];
                std::array::from_fn(|j| {
                    let f = faces.element_face(k, j);
                    let face = faces.face(f);
                    ElementSide {
                        element: k,
                        local_edge: j,
                        face: f,
                        flip: tri[(j + 1) % 3] != face.vertices[0],
                        normal: faces.outward_normal(k, j),
                        length: face.length,
                    }
                })
            })
            .collect();
        let tables = ReferenceTables::new(ks, ks, space_exactness)?;
        let time_rule = quadrature(QuadratureDomain::Interval, time_exactness)?;
        let space = SlabSpace::build(&mesh, &faces, ks, kt)?;
        Ok(Discretization {
            mesh,
            faces,
            geometry,
            sides,
            tables,
            time_basis: LegendreBasis::new(kt),
            time_rule,
            space,
        })
    }

    /// Same mesh and quadrature with temporal degree 0: the layout of
    /// single-time-level (snapshot) fields.
    pub fn snapshot(&self) -> Discretization {
        let mut out = self.clone();
        out.time_basis = LegendreBasis::new(0);
        out.space = self.space.with_temporal_degree(0);
        out
    }

    pub fn mesh(&self) -> &SpatialMesh {
        &self.mesh
    }

    pub fn faces(&self) -> &FaceTopology {
        &self.faces
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.n_faces()
    }

    pub fn spatial_degree(&self) -> usize {
        self.space.ks
    }

    pub fn temporal_degree(&self) -> usize {
        self.space.kt
    }

    pub fn tables(&self) -> &ReferenceTables {
        &self.tables
    }

    pub fn time_basis(&self) -> &LegendreBasis {
        &self.time_basis
    }

    pub fn time_rule(&self) -> &QuadratureRule {
        &self.time_rule
    }

    pub fn space(&self) -> &SlabSpace {
        &self.space
    }

    pub fn side(&self, k: usize, j: usize) -> &ElementSide {
        &self.sides[k][j]
    }

    pub fn element_sides(&self, k: usize) -> &[ElementSide; 3] {
        &self.sides[k]
    }

    /// The one or two element sides lying on face `f`, left first.
    pub fn face_sides(&self, f: usize) -> impl Iterator<Item = &ElementSide> + '_ {
        self.faces.face(f).sides().map(move |s| &self.sides[s.element][s.local_edge])
    }

    pub fn side_table(&self, side: &ElementSide) -> &SideTable {
        self.tables.side(side.local_edge, side.flip)
    }

    /// Physical point on face `f` at parameter `s`.
    pub fn face_point(&self, f: usize, s: f64) -> Point {
        let [a, b] = self.faces.face(f).vertices;
        let (a, b) = (self.mesh.vertices()[a], self.mesh.vertices()[b]);
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    /// Reference coordinates, in `element`, of the point at parameter `s` of
    /// the face on side `side`.
    pub fn side_reference_point(&self, side: &ElementSide, s: f64) -> Point {
        crate::basis::edge_point(side.local_edge, if side.flip { 1.0 - s } else { s })
    }

    /// Reference tables of another element degree on the same quadrature
    /// family (used for liftings of degree `2 k_s`).
    pub fn tables_of_degree(&self, element_degree: usize, exactness: usize) -> Result<ReferenceTables> {
        ReferenceTables::new(element_degree, self.space.ks, exactness)
    }

    /// `int_Omega 1`.
    pub fn area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }
}

/// DOF map of the element velocity, element pressure, facet velocity and
/// facet pressure spaces on one slab, plus one mean-value multiplier per
/// temporal mode.
///
/// Spatial unknowns are numbered element blocks first (velocity component
/// major, then pressure), then face blocks (facet velocity, then facet
/// pressure), then the multiplier. The temporal mode is the fastest index:
/// slab index = `spatial index * (k_t + 1) + mode`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSpace {
    ks: usize,
    kt: usize,
    n_elements: usize,
    n_faces: usize,
    boundary_face: Vec<bool>,
}

impl SlabSpace {
    pub fn build(mesh: &SpatialMesh, faces: &FaceTopology, ks: usize, kt: usize) -> Result<Self> {
        if ks == 0 {
            return Err(HdgError::InvalidArgument(
                "spatial degree 0 leaves no element pressure space (degree k_s - 1)".into(),
            ));
        }
        Ok(SlabSpace {
            ks,
            kt,
            n_elements: mesh.n_elements(),
            n_faces: faces.n_faces(),
            boundary_face: faces.faces().iter().map(|f| f.is_boundary()).collect(),
        })
    }

    pub fn with_temporal_degree(&self, kt: usize) -> SlabSpace {
        SlabSpace { kt, ..self.clone() }
    }

    pub fn spatial_degree(&self) -> usize {
        self.ks
    }

    pub fn temporal_degree(&self) -> usize {
        self.kt
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.boundary_face[f]
    }

    /// Element velocity basis size per component.
    pub fn n_velocity_basis(&self) -> usize {
        simplex_dim(self.ks)
    }

    pub fn n_pressure_basis(&self) -> usize {
        simplex_dim(self.ks - 1)
    }

    pub fn n_facet_basis(&self) -> usize {
        self.ks + 1
    }

    pub fn n_modes(&self) -> usize {
        self.kt + 1
    }

    /// Spatial unknowns per element block.
    pub fn element_block(&self) -> usize {
        2 * self.n_velocity_basis() + self.n_pressure_basis()
    }

    /// Spatial unknowns per face block.
    pub fn face_block(&self) -> usize {
        3 * self.n_facet_basis()
    }

    pub fn n_spatial(&self) -> usize {
        self.n_elements * self.element_block() + self.n_faces * self.face_block() + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_spatial() * self.n_modes()
    }

    pub fn n_element_velocity_dofs(&self) -> usize {
        self.n_elements * 2 * self.n_velocity_basis() * self.n_modes()
    }

    pub fn n_element_pressure_dofs(&self) -> usize {
        self.n_elements * self.n_pressure_basis() * self.n_modes()
    }

    pub fn n_facet_velocity_dofs(&self) -> usize {
        self.n_faces * 2 * self.n_facet_basis() * self.n_modes()
    }

    pub fn n_facet_pressure_dofs(&self) -> usize {
        self.n_faces * self.n_facet_basis() * self.n_modes()
    }

    pub fn n_multipliers(&self) -> usize {
        self.n_modes()
    }

    pub fn n_free_facet_velocity_dofs(&self) -> usize {
        let interior = self.boundary_face.iter().filter(|b| !**b).count();
        interior * 2 * self.n_facet_basis() * self.n_modes()
    }

    #[inline]
    pub fn spatial_u(&self, k: usize, c: usize, i: usize) -> usize {
        k * self.element_block() + c * self.n_velocity_basis() + i
    }

    #[inline]
    pub fn spatial_p(&self, k: usize, i: usize) -> usize {
        k * self.element_block() + 2 * self.n_velocity_basis() + i
    }

    #[inline]
    pub fn spatial_ubar(&self, f: usize, c: usize, j: usize) -> usize {
        self.n_elements * self.element_block() + f * self.face_block() + c * self.n_facet_basis() + j
    }

    #[inline]
    pub fn spatial_pbar(&self, f: usize, j: usize) -> usize {
        self.n_elements * self.element_block() + f * self.face_block() + 2 * self.n_facet_basis() + j
    }

    #[inline]
    pub fn spatial_multiplier(&self) -> usize {
        self.n_spatial() - 1
    }

    #[inline]
    pub fn u(&self, k: usize, c: usize, i: usize, m: usize) -> usize {
        self.spatial_u(k, c, i) * self.n_modes() + m
    }

    #[inline]
    pub fn p(&self, k: usize, i: usize, m: usize) -> usize {
        self.spatial_p(k, i) * self.n_modes() + m
    }

    #[inline]
    pub fn ubar(&self, f: usize, c: usize, j: usize, m: usize) -> usize {
        self.spatial_ubar(f, c, j) * self.n_modes() + m
    }

    #[inline]
    pub fn pbar(&self, f: usize, j: usize, m: usize) -> usize {
        self.spatial_pbar(f, j) * self.n_modes() + m
    }

    #[inline]
    pub fn multiplier(&self, m: usize) -> usize {
        self.spatial_multiplier() * self.n_modes() + m
    }

    /// Range of slab indices of element `k`'s block.
    pub fn element_range(&self, k: usize) -> std::ops::Range<usize> {
        let nt = self.n_modes();
        let start = k * self.element_block() * nt;
        start..start + self.element_block() * nt
    }

    /// Range of slab indices of face `f`'s block.
    pub fn face_range(&self, f: usize) -> std::ops::Range<usize> {
        let nt = self.n_modes();
        let start = (self.n_elements * self.element_block() + f * self.face_block()) * nt;
        start..start + self.face_block() * nt
    }

    /// Facet velocity unknowns on boundary faces (fixed to zero).
    pub fn constrained_dofs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for f in (0..self.n_faces).filter(|&f| self.boundary_face[f]) {
            for c in 0..2 {
                for j in 0..self.n_facet_basis() {
                    for m in 0..self.n_modes() {
                        out.push(self.ubar(f, c, j, m));
                    }
                }
            }
        }
        out
    }

    /// Mask of constrained slab indices.
    pub fn constrained_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_dofs()];
        for i in self.constrained_dofs() {
            mask[i] = true;
        }
        mask
    }

    pub fn zero_field(&self, role: FieldRole) -> DiscreteField {
        let (entities, comps, basis) = self.role_shape(role);
        DiscreteField::zeros(role, entities, comps, basis, self.n_modes())
    }

    pub fn zero_pair(&self) -> VelocityPair {
        VelocityPair {
            element: self.zero_field(FieldRole::ElementVelocity),
            facet: self.zero_field(FieldRole::FacetVelocity),
        }
    }

    pub fn role_shape(&self, role: FieldRole) -> (usize, usize, usize) {
        match role {
            FieldRole::ElementVelocity => (self.n_elements, 2, self.n_velocity_basis()),
            FieldRole::ElementPressure => (self.n_elements, 1, self.n_pressure_basis()),
            FieldRole::FacetVelocity => (self.n_faces, 2, self.n_facet_basis()),
            FieldRole::FacetPressure => (self.n_faces, 1, self.n_facet_basis()),
        }
    }

    fn slab_index(&self, role: FieldRole, e: usize, c: usize, i: usize, m: usize) -> usize {
        match role {
            FieldRole::ElementVelocity => self.u(e, c, i, m),
            FieldRole::ElementPressure => self.p(e, i, m),
            FieldRole::FacetVelocity => self.ubar(e, c, i, m),
            FieldRole::FacetPressure => self.pbar(e, i, m),
        }
    }

    /// Copies the part of a slab vector belonging to `role`.
    pub fn extract(&self, role: FieldRole, x: &[f64]) -> DiscreteField {
        assert_eq!(x.len(), self.n_dofs());
        let mut out = self.zero_field(role);
        let (entities, comps, basis) = self.role_shape(role);
        for e in 0..entities {
            for c in 0..comps {
                for i in 0..basis {
                    for m in 0..self.n_modes() {
                        *out.coefficient_mut(e, c, i, m) = x[self.slab_index(role, e, c, i, m)];
                    }
                }
            }
        }
        out
    }

    /// Writes `field` into its part of a slab vector.
    pub fn insert(&self, field: &DiscreteField, x: &mut [f64]) {
        assert_eq!(x.len(), self.n_dofs());
        let role = field.role();
        assert_eq!(field.shape(), self.role_shape(role), "field shape does not match the space");
        assert_eq!(field.n_modes(), self.n_modes(), "field has a different number of temporal modes");
        let (entities, comps, basis) = self.role_shape(role);
        for e in 0..entities {
            for c in 0..comps {
                for i in 0..basis {
                    for m in 0..self.n_modes() {
                        x[self.slab_index(role, e, c, i, m)] = field.coefficient(e, c, i, m);
                    }
                }
            }
        }
    }

    pub fn extract_pair(&self, x: &[f64]) -> VelocityPair {
        VelocityPair {
            element: self.extract(FieldRole::ElementVelocity, x),
            facet: self.extract(FieldRole::FacetVelocity, x),
        }
    }

    /// Slab vector holding a velocity pair and zero pressures.
    pub fn pair_vector(&self, pair: &VelocityPair) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        self.insert(&pair.element, &mut x);
        self.insert(&pair.facet, &mut x);
        x
    }

    /// Slab vector holding element and facet pressures and zero velocities.
    pub fn pressure_vector(&self, p: &DiscreteField, pbar: &DiscreteField) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs()];
        self.insert(p, &mut x);
        self.insert(pbar, &mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> SpatialMesh {
        SpatialMesh::build_uniform(1, crate::mesh::Rectangle::unit_square()).unwrap()
    }

    #[test]
    fn block_arithmetic_two_triangles() {
        let d = Discretization::new(two_triangles(), 1, 0).unwrap();
        let s = d.space();
        assert_eq!(s.n_element_velocity_dofs(), 12);
        assert_eq!(s.n_free_facet_velocity_dofs(), 4);
        assert_eq!(s.n_element_pressure_dofs(), 2);
        assert_eq!(s.n_multipliers(), 1);
        assert_eq!(
            s.n_dofs(),
            s.n_element_velocity_dofs()
                + s.n_element_pressure_dofs()
                + s.n_facet_velocity_dofs()
                + s.n_facet_pressure_dofs()
                + s.n_multipliers()
        );
    }

    #[test]
    fn offsets_disjoint_and_contiguous() {
        let mesh = SpatialMesh::build_uniform(2, crate::mesh::Rectangle::unit_square()).unwrap();
        for (ks, kt) in [(1, 0), (2, 1), (3, 2)] {
            let d = Discretization::new(mesh.clone(), ks, kt).unwrap();
            let s = d.space();
            let mut seen = vec![0u8; s.n_dofs()];
            for k in 0..s.n_elements() {
                for m in 0..s.n_modes() {
                    for c in 0..2 {
                        for i in 0..s.n_velocity_basis() {
                            seen[s.u(k, c, i, m)] += 1;
                        }
                    }
                    for i in 0..s.n_pressure_basis() {
                        seen[s.p(k, i, m)] += 1;
                    }
                }
            }
            for f in 0..s.n_faces() {
                for m in 0..s.n_modes() {
                    for j in 0..s.n_facet_basis() {
                        seen[s.ubar(f, 0, j, m)] += 1;
                        seen[s.ubar(f, 1, j, m)] += 1;
                        seen[s.pbar(f, j, m)] += 1;
                    }
                }
            }
            for m in 0..s.n_modes() {
                seen[s.multiplier(m)] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1));
            for k in 0..s.n_elements() {
                let r = s.element_range(k);
                assert_eq!(r.start, s.u(k, 0, 0, 0));
                assert_eq!(r.end - 1, s.p(k, s.n_pressure_basis() - 1, s.n_modes() - 1));
            }
        }
    }

    #[test]
    fn degree_zero_rejected() {
        let mesh = two_triangles();
        let faces = build_face_topology(&mesh).unwrap();
        assert!(matches!(SlabSpace::build(&mesh, &faces, 0, 0), Err(HdgError::InvalidArgument(_))));
        assert!(Discretization::new(mesh, 0, 0).is_err());
    }

    #[test]
    fn side_flags_match_face_parametrisation() {
        let mesh = SpatialMesh::build_uniform(3, crate::mesh::Rectangle::unit_square()).unwrap();
        let d = Discretization::new(mesh, 2, 0).unwrap();
        for k in 0..d.n_elements() {
            for side in d.element_sides(k) {
                for s in [0.0, 0.3, 1.0] {
                    let xi = d.side_reference_point(side, s);
                    let x = d.geometry(k).map(xi);
                    let y = d.face_point(side.face, s);
                    assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn extract_insert_round_trip() {
        let mesh = SpatialMesh::build_uniform(2, crate::mesh::Rectangle::unit_square()).unwrap();
        let d = Discretization::new(mesh, 2, 1).unwrap();
        let s = d.space();
        let x: Vec<f64> = (0..s.n_dofs()).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; s.n_dofs()];
        for role in [FieldRole::ElementVelocity, FieldRole::ElementPressure, FieldRole::FacetVelocity, FieldRole::FacetPressure] {
            s.insert(&s.extract(role, &x), &mut y);
        }
        for m in 0..s.n_modes() {
            y[s.multiplier(m)] = x[s.multiplier(m)];
        }
        assert_eq!(x, y);
    }
}
