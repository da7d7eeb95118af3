use super::{Discretization, DiscreteField};

/// H(div) conformity residuals of a single-level element velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Conformity {
    /// Max `|div u|` over volume quadrature points and element vertices.
    pub divergence: f64,
    /// Max `|[[u . n]]|` over interior-face quadrature points.
    pub normal_jump: f64,
    /// Max `|u . n|` over boundary-face quadrature points.
    pub boundary_normal: f64,
}

impl Conformity {
    pub fn max(&self) -> f64 {
        self.divergence.max(self.normal_jump).max(self.boundary_normal)
    }

    pub fn merge(&self, other: &Conformity) -> Conformity {
        Conformity {
            divergence: self.divergence.max(other.divergence),
            normal_jump: self.normal_jump.max(other.normal_jump),
            boundary_normal: self.boundary_normal.max(other.boundary_normal),
        }
    }
}

/// Pointwise divergence, interior normal jumps and boundary normal traces.
pub fn conformity(d: &Discretization, u: &DiscreteField) -> Conformity {
    assert_eq!(u.n_modes(), 1, "conformity needs a single-level field");
    let t = d.tables();
    let mut out = Conformity::default();
    let mut points: Vec<[f64; 2]> = t.volume_rule.points.clone();
    points.extend([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    for k in 0..d.n_elements() {
        for &xi in &points {
            let e = d.evaluate_element_reference(u, k, xi, &[1.0], &[0.0]);
            out.divergence = out.divergence.max((e.gradient[0][0] + e.gradient[1][1]).abs());
        }
    }
    for f in 0..d.n_faces() {
        let face = d.faces().face(f);
        for (p, _) in t.edge_rule.iter() {
            let mut normal_values = Vec::with_capacity(2);
            for side in d.face_sides(f) {
                let xi = d.side_reference_point(side, p[0]);
                let v = d.evaluate_element_reference(u, side.element, xi, &[1.0], &[0.0]).value;
                normal_values.push(v[0] * face.normal[0] + v[1] * face.normal[1]);
            }
            if face.is_boundary() {
                out.boundary_normal = out.boundary_normal.max(normal_values[0].abs());
            } else {
                out.normal_jump = out.normal_jump.max((normal_values[0] - normal_values[1]).abs());
            }
        }
    }
    out
}
