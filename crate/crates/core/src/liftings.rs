//! Spatial liftings, discrete gradients, the time lifting and the discrete
//! time derivative.

use rayon::prelude::*;

use crate::basis::{LegendreBasis, ReferenceTables};
use crate::error::{HdgError, Result};
use crate::linalg::DenseLu;
use crate::mesh::{Point, Slab};
use crate::spaces::{DiscreteField, Discretization, ElementSide, FieldRole, VelocityPair};

/// Vector-valued element field of degree `k` produced by a lifting.
///
/// Component `i * 2 + d` is the `d`-th Cartesian entry of the lifting of
/// scalar input `i`. Layout matches [`DiscreteField`]:
/// `((K * n_components + comp) * n_basis + a) * n_modes + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedField {
    degree: usize,
    n_elements: usize,
    n_inputs: usize,
    n_basis: usize,
    n_modes: usize,
    coefficients: Vec<f64>,
}

impl LiftedField {
    fn zeros(degree: usize, n_elements: usize, n_inputs: usize, n_basis: usize, n_modes: usize) -> Self {
        LiftedField {
            degree,
            n_elements,
            n_inputs,
            n_basis,
            n_modes,
            coefficients: vec![0.0; n_elements * 2 * n_inputs * n_basis * n_modes],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    #[inline]
    pub fn index(&self, k: usize, comp: usize, a: usize, m: usize) -> usize {
        ((k * 2 * self.n_inputs + comp) * self.n_basis + a) * self.n_modes + m
    }

    #[inline]
    pub fn coefficient(&self, k: usize, comp: usize, a: usize, m: usize) -> f64 {
        self.coefficients[self.index(k, comp, a, m)]
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &LiftedField) -> LiftedField {
        assert_eq!(self.coefficients.len(), other.coefficients.len());
        let mut out = self.clone();
        for (a, b) in out.coefficients.iter_mut().zip(&other.coefficients) {
            *a += s * b;
        }
        out
    }

    /// Single-level field at reference time `s`.
    pub fn at_reference_time(&self, s: f64) -> LiftedField {
        let l = LegendreBasis::new(self.n_modes - 1).values(s);
        let blocks = self.coefficients.len() / self.n_modes;
        let coefficients =
            (0..blocks).map(|b| (0..self.n_modes).map(|m| l[m] * self.coefficients[b * self.n_modes + m]).sum()).collect();
        LiftedField { n_modes: 1, coefficients, ..self.clone() }
    }

    /// `sum_K int_K self . other` for single-level fields of equal shape
    /// (exact: the element mass matrix is `det J` times the identity).
    pub fn l2_inner(&self, d: &Discretization, other: &LiftedField) -> f64 {
        assert_eq!(self.n_modes, 1);
        assert_eq!(self.coefficients.len(), other.coefficients.len());
        let per = 2 * self.n_inputs * self.n_basis;
        (0..self.n_elements)
            .map(|k| {
                let det = d.geometry(k).det;
                let r = k * per..(k + 1) * per;
                det * self.coefficients[r.clone()].iter().zip(&other.coefficients[r]).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm_sq(&self, d: &Discretization) -> f64 {
        self.l2_inner(d, self)
    }

    /// Values at reference point `xi` of element `k` (single-level field),
    /// indexed by component.
    pub fn value(&self, lifting: &SpatialLifting, k: usize, xi: Point) -> Vec<f64> {
        let phi = lifting.tables.element_basis.values(xi);
        self.value_with(k, &phi)
    }

    pub(crate) fn value_with(&self, k: usize, phi: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_modes, 1);
        (0..2 * self.n_inputs)
            .map(|comp| (0..self.n_basis).map(|a| self.coefficient(k, comp, a, 0) * phi[a]).sum())
            .collect()
    }
}

/// Lifting of facet mismatch data into degree-`k` vector polynomials:
/// `int_K R(mu) . w = int_dK mu (w . n)` for every `w` in `P_k(K)^2`.
#[derive(Debug, Clone)]
pub struct SpatialLifting {
    degree: usize,
    tables: ReferenceTables,
}

impl SpatialLifting {
    /// Quadrature exactness `k + 2 k_s + 2`, enough for the products used
    /// by the rewritten forms.
    pub fn new(d: &Discretization, degree: usize) -> Result<Self> {
        let tables = d.tables_of_degree(degree, degree + 2 * d.spatial_degree() + 2)?;
        Ok(SpatialLifting { degree, tables })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tables(&self) -> &ReferenceTables {
        &self.tables
    }

    /// Lifts scalar side data. `mu(side, q, m)` is the value at side
    /// quadrature point `q` (of this lifting's tables) for temporal mode `m`;
    /// one call per input `i` in `0..n_inputs`.
    pub fn lift_data(
        &self,
        d: &Discretization,
        n_inputs: usize,
        n_modes: usize,
        mu: impl Fn(usize, &ElementSide, usize, usize) -> f64 + Sync,
    ) -> Result<LiftedField> {
        let nb = self.tables.n_element();
        let mut out = LiftedField::zeros(self.degree, d.n_elements(), n_inputs, nb, n_modes);
        let per = 2 * n_inputs * nb * n_modes;
        let blocks: Vec<Vec<f64>> = (0..d.n_elements())
            .into_par_iter()
            .map(|k| {
                let det = d.geometry(k).det;
                let mut block = vec![0.0; per];
                for side in d.element_sides(k) {
                    let tab = self.tables.side(side.local_edge, side.flip);
                    for q in 0..tab.weights.len() {
                        let wq = tab.weights[q] * side.length / det;
                        for i in 0..n_inputs {
                            for m in 0..n_modes {
                                let v = mu(i, side, q, m);
                                if v == 0.0 {
                                    continue;
                                }
                                for dd in 0..2 {
                                    for a in 0..nb {
                                        block[((i * 2 + dd) * nb + a) * n_modes + m] +=
                                            wq * v * tab.element_values[q][a] * side.normal[dd];
                                    }
                                }
                            }
                        }
                    }
                }
                block
            })
            .collect();
        for (k, b) in blocks.into_iter().enumerate() {
            out.coefficients[k * per..(k + 1) * per].copy_from_slice(&b);
        }
        if out.coefficients.iter().any(|v| !v.is_finite()) {
            return Err(HdgError::Internal("lifting produced non-finite coefficients".into()));
        }
        Ok(out)
    }

    /// Lifting of `v_i - v_bar_i` for each velocity component `i`.
    pub fn lift_mismatch(&self, d: &Discretization, pair: &VelocityPair) -> Result<LiftedField> {
        let nt = pair.element.n_modes();
        let (np, nf) = (d.space().n_velocity_basis(), d.space().n_facet_basis());
        self.lift_data(d, 2, nt, |i, side, q, m| {
            let tab = self.tables.side(side.local_edge, side.flip);
            let ev = &tab.element_values[q];
            let fv = &tab.facet_values[q];
            let u: f64 = (0..np).map(|a| pair.element.coefficient(side.element, i, a, m) * ev[a]).sum();
            let ub: f64 = (0..nf).map(|j| pair.facet.coefficient(side.face, i, j, m) * fv[j]).sum();
            u - ub
        })
    }

    /// Broken gradient `grad_h v_i` expressed in the degree-`k` basis.
    pub fn broken_gradient(&self, d: &Discretization, field: &DiscreteField) -> LiftedField {
        let (ne, nc, nbv) = field.shape();
        let nt = field.n_modes();
        let nb = self.tables.n_element();
        let rule = &self.tables.volume_rule;
        let vgrad: Vec<Vec<[f64; 2]>> =
            rule.points.iter().map(|&p| d.tables().element_basis.evaluate(p).1).collect();
        let mut out = LiftedField::zeros(self.degree, ne, nc, nb, nt);
        for k in 0..ne {
            let g = d.geometry(k);
            for (q, w) in rule.weights.iter().enumerate() {
                let phys: Vec<[f64; 2]> = vgrad[q][..nbv].iter().map(|&r| g.physical_gradient(r)).collect();
                let phi = &self.tables.volume_values[q];
                for i in 0..nc {
                    for m in 0..nt {
                        let mut gr = [0.0; 2];
                        for (a, p) in phys.iter().enumerate() {
                            let c = field.coefficient(k, i, a, m);
                            gr[0] += c * p[0];
                            gr[1] += c * p[1];
                        }
                        for dd in 0..2 {
                            for b in 0..nb {
                                let idx = out.index(k, i * 2 + dd, b, m);
                                out.coefficients[idx] += w * gr[dd] * phi[b];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Discrete gradient `G(v_i, v_bar_i) = grad_h v_i - R(v_i - v_bar_i)`.
    pub fn discrete_gradient(&self, d: &Discretization, pair: &VelocityPair) -> Result<LiftedField> {
        let grad = self.broken_gradient(d, &pair.element);
        let lift = self.lift_mismatch(d, pair)?;
        Ok(grad.axpy(-1.0, &lift))
    }

    /// Maximum over elements `K`, components and basis tests `w = phi_a e_d`
    /// of `|int_K R . w - int_dK mu (w . n)|`, with both sides evaluated by
    /// quadrature of point values. `mu` is evaluated at physical side
    /// points as `mu(i, side, s)` with `s` the face parameter.
    pub fn identity_residual(
        &self,
        d: &Discretization,
        lifted: &LiftedField,
        mu: impl Fn(usize, &ElementSide, f64) -> f64,
    ) -> f64 {
        let nb = self.tables.n_element();
        let mut worst = 0.0f64;
        for k in 0..d.n_elements() {
            let g = d.geometry(k);
            for i in 0..lifted.n_inputs {
                for dd in 0..2 {
                    for a in 0..nb {
                        let mut lhs = 0.0;
                        for (q, w) in self.tables.volume_rule.weights.iter().enumerate() {
                            let phi = &self.tables.volume_values[q];
                            let val = lifted.value_with(k, phi)[i * 2 + dd];
                            lhs += w * g.det * val * phi[a];
                        }
                        let mut rhs = 0.0;
                        for side in d.element_sides(k) {
                            let tab = self.tables.side(side.local_edge, side.flip);
                            for q in 0..tab.weights.len() {
                                rhs += tab.weights[q]
                                    * side.length
                                    * mu(i, side, tab.face_params[q])
                                    * tab.element_values[q][a]
                                    * side.normal[dd];
                            }
                        }
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `int_{I_n} R v dt = ([u]_n, v(t_n^+))` for every `v` in `P_{k_t}(I_n; V_h)`,
/// solved with the temporal mass matrix. `field` is a slab field,
/// `incoming` the single-level trace `u(t_n^-)`.
pub fn time_lifting(slab: Slab, field: &DiscreteField, incoming: Option<&DiscreteField>) -> Result<DiscreteField> {
    let incoming =
        incoming.ok_or_else(|| HdgError::Precondition("time lifting needs the incoming trace u(t_n^-)".into()))?;
    let nt = field.n_modes();
    let kt = nt - 1;
    let basis = LegendreBasis::new(kt);
    let rule = crate::basis::quadrature(crate::basis::QuadratureDomain::Interval, 2 * kt)?;
    let mut mass = vec![0.0; nt * nt];
    for (p, w) in rule.iter() {
        let v = basis.values(p[0]);
        for l in 0..nt {
            for m in 0..nt {
                mass[l * nt + m] += 0.5 * slab.dt() * w * v[l] * v[m];
            }
        }
    }
    let weights = DenseLu::new(nt, &mass)?.solve(&basis.left_values())?;
    let jump = field.time_jump(incoming);
    let mut out = field.scaled(0.0);
    let blocks = jump.coefficients().len();
    for b in 0..blocks {
        let j = jump.coefficients()[b];
        for (m, w) in weights.iter().enumerate() {
            out.coefficients_mut()[b * nt + m] = w * j;
        }
    }
    Ok(out.on_slab(slab))
}

/// Comparison of the defining solve with the representation
/// `([u]_n / 2) sum_m (-1)^m (2m + 1) L_m(t)` written with unmapped
/// reference Legendre polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLiftScaling {
    /// Least-squares factor `c` with `R = c * representation`.
    pub fitted_scale: f64,
    /// `2 / dt`, the factor a unit-endpoint mapping of `L_m` would need.
    pub reference_scale: f64,
    /// Relative residual after fitting.
    pub residual: f64,
}

pub fn time_lift_scaling(lifted: &DiscreteField, jump: &DiscreteField, slab: Slab) -> TimeLiftScaling {
    let nt = lifted.n_modes();
    let blocks = jump.coefficients().len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut rep = vec![0.0; blocks * nt];
    for b in 0..blocks {
        for m in 0..nt {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let r = 0.5 * jump.coefficients()[b] * sign * (2.0 * m as f64 + 1.0);
            rep[b * nt + m] = r;
            num += r * lifted.coefficients()[b * nt + m];
            den += r * r;
        }
    }
    let fitted = if den > 0.0 { num / den } else { 0.0 };
    let mut res = 0.0;
    let mut scale = 0.0;
    for (i, r) in rep.iter().enumerate() {
        res += (lifted.coefficients()[i] - fitted * r).powi(2);
        scale += lifted.coefficients()[i].powi(2);
    }
    TimeLiftScaling {
        fitted_scale: fitted,
        reference_scale: 2.0 / slab.dt(),
        residual: if scale > 0.0 { (res / scale).sqrt() } else { 0.0 },
    }
}

/// `D_t u = d_tau u + R(u)` on one slab.
pub fn discrete_time_derivative(slab: Slab, field: &DiscreteField, incoming: Option<&DiscreteField>) -> Result<DiscreteField> {
    let field = field.clone().on_slab(slab);
    let lift = time_lifting(slab, &field, incoming)?;
    Ok(field.time_derivative()?.axpy(1.0, &lift).on_slab(slab))
}

/// Residual of the defining identity of the time lifting against every
/// basis function `phi_i L_l`: `max |int R phi_i L_l dt - [u]_i L_l(-1)|`
/// (the element mass factor `det J` is included).
pub fn time_lifting_residual(d: &Discretization, slab: Slab, lifted: &DiscreteField, jump: &DiscreteField) -> f64 {
    assert_eq!(lifted.role(), FieldRole::ElementVelocity);
    let nt = lifted.n_modes();
    let basis = LegendreBasis::new(nt - 1);
    let rule = crate::basis::quadrature(crate::basis::QuadratureDomain::Interval, 2 * nt + 2).expect("low degree");
    let left = basis.left_values();
    let (ne, nc, nb) = lifted.shape();
    let mut worst = 0.0f64;
    for k in 0..ne {
        let det = d.geometry(k).det;
        for c in 0..nc {
            for i in 0..nb {
                for l in 0..nt {
                    let mut lhs = 0.0;
                    for (p, w) in rule.iter() {
                        let v = basis.values(p[0]);
                        let r: f64 = (0..nt).map(|m| lifted.coefficient(k, c, i, m) * v[m]).sum();
                        lhs += 0.5 * slab.dt() * w * det * r * v[l];
                    }
                    let rhs = det * jump.coefficient(k, c, i, 0) * left[l];
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}
