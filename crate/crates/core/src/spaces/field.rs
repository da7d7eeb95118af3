use super::Discretization;
use crate::error::{HdgError, Result};
use crate::mesh::{ElementGeometry, Point, Slab};
use crate::basis::LegendreBasis;

/// Which space a [`DiscreteField`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldRole {
    ElementVelocity,
    ElementPressure,
    FacetVelocity,
    FacetPressure,
}

impl FieldRole {
    pub fn is_facet(self) -> bool {
        matches!(self, FieldRole::FacetVelocity | FieldRole::FacetPressure)
    }
}

/// Coefficients of one element or facet function on a slab (or at a single
/// time level when `n_modes == 1` and no slab is attached).
///
/// Layout: `((entity * n_components + component) * n_basis + i) * n_modes + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    role: FieldRole,
    n_entities: usize,
    n_components: usize,
    n_basis: usize,
    n_modes: usize,
    slab: Option<Slab>,
    coefficients: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(role: FieldRole, n_entities: usize, n_components: usize, n_basis: usize, n_modes: usize) -> Self {
        DiscreteField {
            role,
            n_entities,
            n_components,
            n_basis,
            n_modes,
            slab: None,
            coefficients: vec![0.0; n_entities * n_components * n_basis * n_modes],
        }
    }

    /// A field shaped like `self` with the given coefficients.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != self.coefficients.len() {
            return Err(HdgError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.coefficients.len(),
                coefficients.len()
            )));
        }
        Ok(DiscreteField { coefficients, ..self.clone() })
    }

    pub fn on_slab(mut self, slab: Slab) -> Self {
        self.slab = Some(slab);
        self
    }

    pub fn without_slab(mut self) -> Self {
        self.slab = None;
        self
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    /// `(entities, components, basis functions per component)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_entities, self.n_components, self.n_basis)
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn slab(&self) -> Option<Slab> {
        self.slab
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    #[inline]
    pub fn index(&self, e: usize, c: usize, i: usize, m: usize) -> usize {
        ((e * self.n_components + c) * self.n_basis + i) * self.n_modes + m
    }

    #[inline]
    pub fn coefficient(&self, e: usize, c: usize, i: usize, m: usize) -> f64 {
        self.coefficients[self.index(e, c, i, m)]
    }

    #[inline]
    pub fn coefficient_mut(&mut self, e: usize, c: usize, i: usize, m: usize) -> &mut f64 {
        let idx = self.index(e, c, i, m);
        &mut self.coefficients[idx]
    }

    fn check_compatible(&self, other: &DiscreteField) {
        assert_eq!(self.role, other.role, "field roles differ");
        assert_eq!(self.coefficients.len(), other.coefficients.len(), "field sizes differ");
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &DiscreteField) -> DiscreteField {
        self.check_compatible(other);
        let mut out = self.clone();
        for (x, y) in out.coefficients.iter_mut().zip(&other.coefficients) {
            *x += a * y;
        }
        out
    }

    pub fn scaled(&self, a: f64) -> DiscreteField {
        let mut out = self.clone();
        out.coefficients.iter_mut().for_each(|x| *x *= a);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn time_combination(&self, weights: &[f64]) -> DiscreteField {
        assert_eq!(weights.len(), self.n_modes);
        let blocks = self.n_entities * self.n_components * self.n_basis;
        let coefficients = (0..blocks)
            .map(|b| (0..self.n_modes).map(|m| weights[m] * self.coefficients[b * self.n_modes + m]).sum())
            .collect();
        DiscreteField { n_modes: 1, slab: None, coefficients, ..self.clone() }
    }

    /// Value at the reference time `s` in `[-1, 1]` as a single-level field.
    pub fn at_reference_time(&self, s: f64) -> DiscreteField {
        self.time_combination(&LegendreBasis::new(self.n_modes - 1).values(s))
    }

    /// Trace `u(t_{n+1}^-)` at the end of the slab.
    pub fn end_trace(&self) -> DiscreteField {
        self.time_combination(&vec![1.0; self.n_modes])
    }

    /// Trace `u(t_n^+)` at the start of the slab.
    pub fn start_trace(&self) -> DiscreteField {
        self.time_combination(&LegendreBasis::new(self.n_modes - 1).left_values())
    }

    /// Time jump `[u]_n = u(t_n^+) - u(t_n^-)` against the incoming trace.
    pub fn time_jump(&self, incoming: &DiscreteField) -> DiscreteField {
        let plus = self.start_trace();
        plus.axpy(-1.0, incoming)
    }

    /// Constant-in-time extension of a single-level field to `n_modes`.
    pub fn extend_in_time(&self, n_modes: usize) -> DiscreteField {
        assert_eq!(self.n_modes, 1, "only single-level fields can be extended");
        let mut out = DiscreteField::zeros(self.role, self.n_entities, self.n_components, self.n_basis, n_modes);
        for (b, &v) in self.coefficients.iter().enumerate() {
            out.coefficients[b * n_modes] = v;
        }
        out
    }

    /// Coefficients of the broken time derivative `d/dt` (requires a slab).
    pub fn time_derivative(&self) -> Result<DiscreteField> {
        let slab = self
            .slab
            .ok_or_else(|| HdgError::Precondition("time derivative needs a field attached to a slab".into()))?;
        let d = LegendreBasis::new(self.n_modes - 1).derivative_matrix();
        let scale = 2.0 / slab.dt();
        let mut out = self.scaled(0.0);
        let blocks = self.n_entities * self.n_components * self.n_basis;
        for b in 0..blocks {
            for m in 0..self.n_modes {
                let c = self.coefficients[b * self.n_modes + m];
                for (j, &djm) in d[m].iter().enumerate() {
                    out.coefficients[b * self.n_modes + j] += scale * djm * c;
                }
            }
        }
        Ok(out)
    }
}

/// Element velocity and facet velocity of a discrete pair `(v, v_bar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityPair {
    pub element: DiscreteField,
    pub facet: DiscreteField,
}

impl VelocityPair {
    pub fn axpy(&self, a: f64, other: &VelocityPair) -> VelocityPair {
        VelocityPair { element: self.element.axpy(a, &other.element), facet: self.facet.axpy(a, &other.facet) }
    }

    pub fn scaled(&self, a: f64) -> VelocityPair {
        VelocityPair { element: self.element.scaled(a), facet: self.facet.scaled(a) }
    }

    pub fn at_reference_time(&self, s: f64) -> VelocityPair {
        VelocityPair { element: self.element.at_reference_time(s), facet: self.facet.at_reference_time(s) }
    }

    pub fn on_slab(self, slab: Slab) -> VelocityPair {
        VelocityPair { element: self.element.on_slab(slab), facet: self.facet.on_slab(slab) }
    }
}

/// Value, broken gradient and broken time derivative per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Vec<f64>,
    pub gradient: Vec<[f64; 2]>,
    pub time_derivative: Vec<f64>,
}

/// Traces of a pair on one face at one point, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceTraces {
    pub left: Vec<f64>,
    pub right: Option<Vec<f64>>,
    pub facet: Vec<f64>,
    /// `v^L - v^R` on interior faces, the trace on boundary faces.
    pub jump: Vec<f64>,
    /// `(v^L + v^R) / 2` on interior faces, the trace on boundary faces.
    pub average: Vec<f64>,
    pub mismatch_left: Vec<f64>,
    pub mismatch_right: Option<Vec<f64>>,
}

impl Discretization {
    fn time_weights(&self, field: &DiscreteField, t: Option<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let nt = field.n_modes();
        match (field.slab(), t) {
            (Some(slab), Some(t)) => {
                let tol = 1e-12 * slab.dt().max(slab.end.abs());
                if t < slab.start - tol || t > slab.end + tol {
                    return Err(HdgError::Domain(format!(
                        "time {t} outside slab [{}, {}]",
                        slab.start, slab.end
                    )));
                }
                let b = LegendreBasis::new(nt - 1);
                let s = slab.reference(t).clamp(-1.0, 1.0);
                let mut v = vec![0.0; nt];
                let mut d = vec![0.0; nt];
                b.values_into(s, &mut v, Some(&mut d));
                let scale = 2.0 / slab.dt();
                d.iter_mut().for_each(|x| *x *= scale);
                Ok((v, d))
            }
            (Some(_), None) => Err(HdgError::InvalidArgument("a slab field needs an evaluation time".into())),
            (None, _) if nt == 1 => Ok((vec![1.0], vec![0.0])),
            (None, _) => Err(HdgError::InvalidArgument(
                "a field with several temporal modes must be attached to a slab".into(),
            )),
        }
    }

    /// Evaluates an element field on element `k` at reference point `xi`
    /// with explicit temporal weights.
    pub fn evaluate_element_reference(
        &self,
        field: &DiscreteField,
        k: usize,
        xi: Point,
        time_values: &[f64],
        time_derivs: &[f64],
    ) -> Evaluation {
        let (phi, dphi) = self.tables().element_basis.evaluate(xi);
        evaluate_element_with(field, k, self.geometry(k), &phi, &dphi, time_values, time_derivs)
    }

    /// Evaluates an element field at physical point `x` of element `k` and
    /// time `t` (ignored for single-level fields).
    pub fn evaluate(&self, field: &DiscreteField, k: usize, x: Point, t: Option<f64>) -> Result<Evaluation> {
        if field.role().is_facet() {
            return Err(HdgError::InvalidArgument("use evaluate_facet for facet fields".into()));
        }
        let geom = self.geometry(k);
        let xi = geom.inverse_map(x);
        if !ElementGeometry::contains_reference(xi, 1e-12) {
            return Err(HdgError::Domain(format!("point ({}, {}) is not in element {k}", x[0], x[1])));
        }
        let (tv, td) = self.time_weights(field, t)?;
        Ok(self.evaluate_element_reference(field, k, xi, &tv, &td))
    }

    /// Evaluates a facet field on face `f` at parameter `s` in `[0, 1]`.
    pub fn evaluate_facet(&self, field: &DiscreteField, f: usize, s: f64, t: Option<f64>) -> Result<Vec<f64>> {
        if !field.role().is_facet() {
            return Err(HdgError::InvalidArgument("evaluate_facet needs a facet field".into()));
        }
        if !(-1e-12..=1.0 + 1e-12).contains(&s) {
            return Err(HdgError::Domain(format!("face parameter {s} outside [0, 1]")));
        }
        let (tv, _) = self.time_weights(field, t)?;
        let psi = self.tables().facet_basis.values(s);
        Ok(evaluate_facet_with(field, f, &psi, &tv))
    }

    /// Traces of `pair` on face `f` at parameter `s` and time `t`.
    pub fn face_traces(&self, pair: &VelocityPair, f: usize, s: f64, t: Option<f64>) -> Result<FaceTraces> {
        let facet = self.evaluate_facet(&pair.facet, f, s, t)?;
        let mut values = Vec::with_capacity(2);
        for side in self.face_sides(f) {
            let xi = self.side_reference_point(side, s);
            let (tv, td) = self.time_weights(&pair.element, t)?;
            values.push(self.evaluate_element_reference(&pair.element, side.element, xi, &tv, &td).value);
        }
        let left = values[0].clone();
        let right = values.get(1).cloned();
        let (jump, average) = match &right {
            Some(r) => (
                left.iter().zip(r).map(|(a, b)| a - b).collect(),
                left.iter().zip(r).map(|(a, b)| 0.5 * (a + b)).collect(),
            ),
            None => (left.clone(), left.clone()),
        };
        let mismatch_left = left.iter().zip(&facet).map(|(a, b)| a - b).collect();
        let mismatch_right = right.as_ref().map(|r| r.iter().zip(&facet).map(|(a, b)| a - b).collect());
        Ok(FaceTraces { left, right, facet, jump, average, mismatch_left, mismatch_right })
    }
}

/// Element evaluation from precomputed basis values and reference gradients.
pub(crate) fn evaluate_element_with(
    field: &DiscreteField,
    k: usize,
    geom: &ElementGeometry,
    phi: &[f64],
    dphi: &[[f64; 2]],
    time_values: &[f64],
    time_derivs: &[f64],
) -> Evaluation {
    let (_, nc, nb) = field.shape();
    let nt = field.n_modes();
    let mut value = vec![0.0; nc];
    let mut gradient = vec![[0.0; 2]; nc];
    let mut time_derivative = vec![0.0; nc];
    for c in 0..nc {
        let mut g = [0.0; 2];
        for i in 0..nb {
            let base = field.index(k, c, i, 0);
            let coef = &field.coefficients()[base..base + nt];
            let cv: f64 = coef.iter().zip(time_values).map(|(a, b)| a * b).sum();
            let cd: f64 = coef.iter().zip(time_derivs).map(|(a, b)| a * b).sum();
            value[c] += cv * phi[i];
            time_derivative[c] += cd * phi[i];
            g[0] += cv * dphi[i][0];
            g[1] += cv * dphi[i][1];
        }
        gradient[c] = geom.physical_gradient(g);
    }
    Evaluation { value, gradient, time_derivative }
}

pub(crate) fn evaluate_facet_with(field: &DiscreteField, f: usize, psi: &[f64], time_values: &[f64]) -> Vec<f64> {
    let (_, nc, nb) = field.shape();
    let nt = field.n_modes();
    (0..nc)
        .map(|c| {
            (0..nb)
                .map(|j| {
                    let base = field.index(f, c, j, 0);
                    let cv: f64 = field.coefficients()[base..base + nt].iter().zip(time_values).map(|(a, b)| a * b).sum();
                    cv * psi[j]
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Rectangle, SpaceTimeLayout, SpatialMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(n: usize, ks: usize, kt: usize) -> Discretization {
        Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap(), ks, kt).unwrap()
    }

    fn random_field(d: &Discretization, role: FieldRole, seed: u64) -> DiscreteField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = d.space().zero_field(role);
        f.coefficients_mut().iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        f
    }

    #[test]
    fn constant_field_evaluates_to_one() {
        let d = disc(2, 2, 0);
        let mut f = d.space().zero_field(FieldRole::ElementPressure);
        for k in 0..d.n_elements() {
            // phi_0 = sqrt(2) on the reference triangle.
            *f.coefficient_mut(k, 0, 0, 0) = 1.0 / 2f64.sqrt();
        }
        for k in 0..d.n_elements() {
            let c = d.geometry(k).map([0.2, 0.3]);
            let e = d.evaluate(&f, k, c, None).unwrap();
            assert!((e.value[0] - 1.0).abs() < 1e-14);
            assert!(e.gradient[0][0].abs() < 1e-12 && e.gradient[0][1].abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_element_point_is_domain_error() {
        let d = disc(2, 1, 0);
        let f = d.space().zero_field(FieldRole::ElementVelocity);
        let far = d.geometry(1).map([2.0, 2.0]);
        assert!(matches!(d.evaluate(&f, 1, far, None), Err(HdgError::Domain(_))));
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let d = disc(2, 2, 2);
        let slab = SpaceTimeLayout::uniform(1.0, 4).unwrap().slab(1);
        let f = random_field(&d, FieldRole::ElementVelocity, 7).on_slab(slab);
        let k = 3;
        let x = d.geometry(k).map([0.25, 0.25]);
        let t = 0.4;
        let e = d.evaluate(&f, k, x, Some(t)).unwrap();
        let h = 1e-6;
        let ep = d.evaluate(&f, k, x, Some(t + h)).unwrap();
        let em = d.evaluate(&f, k, x, Some(t - h)).unwrap();
        let dt = f.time_derivative().unwrap().on_slab(slab);
        let e2 = d.evaluate(&dt, k, x, Some(t)).unwrap();
        for c in 0..2 {
            let fd = (ep.value[c] - em.value[c]) / (2.0 * h);
            assert!((e.time_derivative[c] - fd).abs() < 1e-6);
            assert!((e2.value[c] - e.time_derivative[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn spatially_constant_modes_have_no_time_derivative() {
        // Coefficients only in the first temporal mode: no time dependence.
        let d = disc(1, 1, 2);
        let slab = SpaceTimeLayout::uniform(1.0, 1).unwrap().slab(0);
        let mut f = d.space().zero_field(FieldRole::ElementVelocity);
        *f.coefficient_mut(0, 0, 1, 0) = 1.0;
        let f = f.on_slab(slab);
        let e = d.evaluate(&f, 0, d.geometry(0).map([0.3, 0.3]), Some(0.5)).unwrap();
        assert_eq!(e.time_derivative, vec![0.0, 0.0]);
    }

    #[test]
    fn opposite_constants_jump_two() {
        let d = disc(1, 1, 0);
        let mut pair = d.space().zero_pair();
        let c = 1.0 / 2f64.sqrt();
        *pair.element.coefficient_mut(0, 0, 0, 0) = c;
        *pair.element.coefficient_mut(1, 0, 0, 0) = -c;
        let interior = (0..d.n_faces()).find(|&f| !d.faces().face(f).is_boundary()).unwrap();
        let tr = d.face_traces(&pair, interior, 0.4, None).unwrap();
        assert!((tr.jump[0] - 2.0).abs() < 1e-14);
        assert!(tr.average[0].abs() < 1e-14);
        let boundary = (0..d.n_faces()).find(|&f| d.faces().face(f).is_boundary()).unwrap();
        let tb = d.face_traces(&pair, boundary, 0.4, None).unwrap();
        assert_eq!(tb.jump, tb.left);
        assert_eq!(tb.average, tb.left);
    }

    #[test]
    fn time_traces_and_jump() {
        let d = disc(1, 1, 2);
        let f = random_field(&d, FieldRole::ElementVelocity, 3);
        let end = f.end_trace();
        let start = f.start_trace();
        let a = f.at_reference_time(1.0);
        let b = f.at_reference_time(-1.0);
        for i in 0..end.coefficients().len() {
            assert!((end.coefficients()[i] - a.coefficients()[i]).abs() < 1e-14);
            assert!((start.coefficients()[i] - b.coefficients()[i]).abs() < 1e-14);
        }
        // A field constant in time with matching incoming trace has no jump.
        let c = end.extend_in_time(3);
        assert_eq!(c.time_jump(&end).max_abs(), 0.0);
    }
}
