use super::{Discretization, DiscreteField, ElementSide, VelocityPair};

fn require_snapshot(field: &DiscreteField) {
    assert_eq!(field.n_modes(), 1, "snapshot norms need a single-level field; use at_reference_time first");
}

/// Values of an element field on a side at the side quadrature points,
/// `[q][component]`.
pub(crate) fn element_side_values(d: &Discretization, field: &DiscreteField, side: &ElementSide) -> Vec<Vec<f64>> {
    let table = d.side_table(side);
    let (_, nc, nb) = field.shape();
    table
        .element_values
        .iter()
        .map(|phi| {
            (0..nc)
                .map(|c| (0..nb).map(|i| field.coefficient(side.element, c, i, 0) * phi[i]).sum())
                .collect()
        })
        .collect()
}

/// Values of a facet field on a side at the side quadrature points.
pub(crate) fn facet_side_values(d: &Discretization, field: &DiscreteField, side: &ElementSide) -> Vec<Vec<f64>> {
    let table = d.side_table(side);
    let (_, nc, nb) = field.shape();
    table
        .facet_values
        .iter()
        .map(|psi| (0..nc).map(|c| (0..nb).map(|j| field.coefficient(side.face, c, j, 0) * psi[j]).sum()).collect())
        .collect()
}

/// `||v||_{L^2(Omega)}` of an element field.
pub fn l2_norm(d: &Discretization, field: &DiscreteField) -> f64 {
    require_snapshot(field);
    assert!(!field.role().is_facet());
    let (ne, nc, nb) = field.shape();
    let mut s = 0.0;
    for k in 0..ne {
        let det = d.geometry(k).det;
        for c in 0..nc {
            for i in 0..nb {
                s += det * field.coefficient(k, c, i, 0).powi(2);
            }
        }
    }
    s.sqrt()
}

/// `sum_K ||grad v||_K^2`.
pub fn broken_gradient_norm_sq(d: &Discretization, field: &DiscreteField) -> f64 {
    require_snapshot(field);
    let (ne, nc, nb) = field.shape();
    let t = d.tables();
    let mut s = 0.0;
    for k in 0..ne {
        let g = d.geometry(k);
        for (q, w) in t.volume_rule.weights.iter().enumerate() {
            let dphi = &t.volume_gradients[q];
            for c in 0..nc {
                let mut gr = [0.0; 2];
                for i in 0..nb {
                    let a = field.coefficient(k, c, i, 0);
                    gr[0] += a * dphi[i][0];
                    gr[1] += a * dphi[i][1];
                }
                let p = g.physical_gradient(gr);
                s += w * g.det * (p[0] * p[0] + p[1] * p[1]);
            }
        }
    }
    s
}

/// `||v||_{1,h}^2 = sum_K ||grad v||_K^2 + sum_F h_F^{-1} ||[[v]]||_F^2`.
pub fn norm_1h(d: &Discretization, field: &DiscreteField) -> f64 {
    let mut s = broken_gradient_norm_sq(d, field);
    for f in 0..d.n_faces() {
        let sides: Vec<&ElementSide> = d.face_sides(f).collect();
        let left = element_side_values(d, field, sides[0]);
        let right = sides.get(1).map(|side| element_side_values(d, field, side));
        let table = d.side_table(sides[0]);
        for (q, w) in table.weights.iter().enumerate() {
            for c in 0..field.n_components() {
                let j = left[q][c] - right.as_ref().map_or(0.0, |r| r[q][c]);
                s += w * j * j;
            }
        }
    }
    s.sqrt()
}

/// `|||(v, v_bar)|||_v^2 = sum_K ||grad v||_K^2 + sum_K h_K^{-1} ||v - v_bar||_{dK}^2`.
pub fn norm_v(d: &Discretization, pair: &VelocityPair) -> f64 {
    (broken_gradient_norm_sq(d, &pair.element) + mismatch_norm_sq(d, pair)).sqrt()
}

/// `sum_K h_K^{-1} ||v - v_bar||_{dK}^2`.
pub fn mismatch_norm_sq(d: &Discretization, pair: &VelocityPair) -> f64 {
    require_snapshot(&pair.element);
    require_snapshot(&pair.facet);
    let mut s = 0.0;
    for k in 0..d.n_elements() {
        let hk = d.geometry(k).diameter;
        for side in d.element_sides(k) {
            let u = element_side_values(d, &pair.element, side);
            let ub = facet_side_values(d, &pair.facet, side);
            let table = d.side_table(side);
            for (q, w) in table.weights.iter().enumerate() {
                for c in 0..pair.element.n_components() {
                    s += w * side.length / hk * (u[q][c] - ub[q][c]).powi(2);
                }
            }
        }
    }
    s
}

/// `int_{I_n} g(v(t)) dt` by the slab's temporal quadrature, with `g`
/// applied to single-level snapshots.
pub fn slab_integral<T>(d: &Discretization, dt: f64, field: &T, snapshot: impl Fn(&T, f64) -> T, g: impl Fn(&T) -> f64) -> f64 {
    d.time_rule().iter().map(|(p, w)| 0.5 * dt * w * g(&snapshot(field, p[0]))).sum()
}

/// `int_{I_n} ||v||_{L^2}^2 dt`.
pub fn integrated_l2_norm_sq(d: &Discretization, dt: f64, field: &DiscreteField) -> f64 {
    slab_integral(d, dt, field, |f, s| f.at_reference_time(s), |f| l2_norm(d, f).powi(2))
}

/// `int_{I_n} ||v||_{1,h}^2 dt`.
pub fn integrated_norm_1h_sq(d: &Discretization, dt: f64, field: &DiscreteField) -> f64 {
    slab_integral(d, dt, field, |f, s| f.at_reference_time(s), |f| norm_1h(d, f).powi(2))
}

/// `int_{I_n} |||(v, v_bar)|||_v^2 dt`.
pub fn integrated_norm_v_sq(d: &Discretization, dt: f64, pair: &VelocityPair) -> f64 {
    slab_integral(d, dt, pair, |p, s| p.at_reference_time(s), |p| norm_v(d, p).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Rectangle, SpatialMesh};
    use crate::spaces::FieldRole;

    fn disc(n: usize, ks: usize) -> Discretization {
        Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap(), ks, 0).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let d = disc(2, 1);
        let p = d.space().zero_pair();
        assert_eq!(norm_v(&d, &p), 0.0);
        assert_eq!(norm_1h(&d, &p.element), 0.0);
        assert_eq!(l2_norm(&d, &p.element), 0.0);
    }

    #[test]
    fn constant_l2_norm() {
        let d = disc(3, 2);
        let mut f = d.space().zero_field(FieldRole::ElementPressure);
        for k in 0..d.n_elements() {
            *f.coefficient_mut(k, 0, 0, 0) = 3.0 / 2f64.sqrt();
        }
        assert!((l2_norm(&d, &f) - 3.0).abs() < 1e-13);
        // Boundary jumps of a constant: sum_F h_F^{-1} 9 |F| = 9 * (boundary faces).
        let nb = d.faces().n_boundary() as f64;
        assert!((norm_1h(&d, &f).powi(2) - 9.0 * nb).abs() < 1e-10);
    }
}
