//! Sparse assembly of the viscous, convective, pressure-coupling and
//! temporal terms on one space-time slab.
//!
//! Spatial blocks are assembled on the single-level layout (one temporal
//! mode) and tensorised with small temporal matrices; the slab index of
//! spatial unknown `s` and temporal mode `m` is `s * (k_t + 1) + m`.
//! Rows are test functions, columns trial functions.

use rayon::prelude::*;

use crate::basis::LegendreBasis;
use crate::error::{HdgError, Result};
use crate::linalg::{CsrMatrix, Entry};
use crate::mesh::{Point, Slab};
use crate::spaces::{DiscreteField, Discretization, FieldRole, SlabSpace, VelocityPair};

/// Body force `f(x, t)`.
pub type BodyForce<'a> = &'a (dyn Fn(Point, f64) -> [f64; 2] + Sync);

/// Local unknowns of one velocity component on element `k`: the element
/// basis followed by the facet basis of each of the three sides.
struct LocalVelocity {
    rows: Vec<usize>,
    np: usize,
    nf: usize,
}

impl LocalVelocity {
    fn new(d: &Discretization, k: usize, c: usize) -> Self {
        let s = d.space();
        let (np, nf) = (s.n_velocity_basis(), s.n_facet_basis());
        let mut rows: Vec<usize> = (0..np).map(|i| s.spatial_u(k, c, i)).collect();
        for side in d.element_sides(k) {
            rows.extend((0..nf).map(|j| s.spatial_ubar(side.face, c, j)));
        }
        LocalVelocity { rows, np, nf }
    }

    fn facet_offset(&self, j: usize) -> usize {
        self.np + j * self.nf
    }

    fn scatter(&self, local: &[f64], out: &mut Vec<Entry>) {
        let n = self.rows.len();
        for a in 0..n {
            for b in 0..n {
                let v = local[a * n + b];
                if v != 0.0 {
                    out.push((self.rows[a], self.rows[b], v));
                }
            }
        }
    }
}

pub(crate) fn parallel_entries(n: usize, f: impl Fn(usize) -> Vec<Entry> + Sync + Send) -> Vec<Entry> {
    let parts: Vec<Vec<Entry>> = (0..n).into_par_iter().map(f).collect();
    parts.concat()
}

/// Viscous form `a_h` on the single-level layout:
/// `sum_K int_K grad u : grad v + sum_K int_dK alpha/h_K (u - u_bar)(v - v_bar)
///  - (u - u_bar) d_n v - d_n u (v - v_bar)`.
pub fn assemble_a_h(d: &Discretization, alpha: f64) -> Result<CsrMatrix> {
    if !(alpha > 0.0) {
        return Err(HdgError::InvalidArgument(format!("penalty must be positive, got {alpha}")));
    }
    Ok(assemble_a_h_unchecked(d, alpha))
}

/// As [`assemble_a_h`] without the positivity check on `alpha` (used by
/// negative controls).
pub fn assemble_a_h_unchecked(d: &Discretization, alpha: f64) -> CsrMatrix {
    let n = d.space().n_spatial();
    let t = d.tables();
    let entries = parallel_entries(d.n_elements(), |k| {
        let g = d.geometry(k);
        let pen = alpha / g.diameter;
        let proto = LocalVelocity::new(d, k, 0);
        let (np, nf) = (proto.np, proto.nf);
        let nl = proto.rows.len();
        let mut local = vec![0.0; nl * nl];
        for (q, w) in t.volume_rule.weights.iter().enumerate() {
            let grads: Vec<[f64; 2]> = t.volume_gradients[q][..np].iter().map(|&r| g.physical_gradient(r)).collect();
            let wq = w * g.det;
            for i in 0..np {
                for j in 0..np {
                    local[i * nl + j] += wq * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
        for (js, side) in d.element_sides(k).iter().enumerate() {
            let tab = d.side_table(side);
            let off = proto.facet_offset(js);
            for q in 0..tab.weights.len() {
                let wq = tab.weights[q] * side.length;
                let phi = &tab.element_values[q][..np];
                let psi = &tab.facet_values[q];
                let dn: Vec<f64> = tab.element_gradients[q][..np]
                    .iter()
                    .map(|&r| {
                        let p = g.physical_gradient(r);
                        p[0] * side.normal[0] + p[1] * side.normal[1]
                    })
                    .collect();
                for i in 0..np {
                    for j in 0..np {
                        local[i * nl + j] += wq * (pen * phi[i] * phi[j] - phi[j] * dn[i] - dn[j] * phi[i]);
                    }
                    for j in 0..nf {
                        local[i * nl + off + j] += wq * (-pen * phi[i] * psi[j] + psi[j] * dn[i]);
                        local[(off + j) * nl + i] += wq * (-pen * psi[j] * phi[i] + dn[i] * psi[j]);
                    }
                }
                for i in 0..nf {
                    for j in 0..nf {
                        local[(off + i) * nl + off + j] += wq * pen * psi[i] * psi[j];
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(2 * nl * nl);
        for c in 0..2 {
            LocalVelocity::new(d, k, c).scatter(&local, &mut out);
        }
        out
    });
    CsrMatrix::from_entries(n, n, entries)
}

/// Convective form `o_h(w; u, v)` on the single-level layout, for a
/// single-level element velocity `w`:
/// `- sum_K int_K (u (x) w) : grad v + sum_K int_dK 1/2 (w.n)(u + u_bar).(v - v_bar)
///  + 1/2 |w.n| (u - u_bar).(v - v_bar)`.
pub fn assemble_o_h(d: &Discretization, w: &DiscreteField) -> Result<CsrMatrix> {
    let s = d.space();
    if w.role() != FieldRole::ElementVelocity || w.n_modes() != 1 || w.shape() != s.role_shape(FieldRole::ElementVelocity) {
        return Err(HdgError::InvalidArgument(
            "convection field must be a single-level element velocity on the same mesh and degree".into(),
        ));
    }
    let n = s.n_spatial();
    let t = d.tables();
    let entries = parallel_entries(d.n_elements(), |k| {
        let g = d.geometry(k);
        let proto = LocalVelocity::new(d, k, 0);
        let (np, nf) = (proto.np, proto.nf);
        let nl = proto.rows.len();
        let wk = |phi: &[f64]| -> [f64; 2] {
            let mut v = [0.0; 2];
            for (c, vc) in v.iter_mut().enumerate() {
                *vc = (0..np).map(|i| w.coefficient(k, c, i, 0) * phi[i]).sum();
            }
            v
        };
        let mut local = vec![0.0; nl * nl];
        for (q, wt) in t.volume_rule.weights.iter().enumerate() {
            let phi = &t.volume_values[q][..np];
            let wv = wk(phi);
            let wq = wt * g.det;
            for i in 0..np {
                let gi = g.physical_gradient(t.volume_gradients[q][i]);
                let adv = wv[0] * gi[0] + wv[1] * gi[1];
                for j in 0..np {
                    local[i * nl + j] -= wq * phi[j] * adv;
                }
            }
        }
        for (js, side) in d.element_sides(k).iter().enumerate() {
            let tab = d.side_table(side);
            let off = proto.facet_offset(js);
            for q in 0..tab.weights.len() {
                let wq = tab.weights[q] * side.length;
                let phi = &tab.element_values[q][..np];
                let psi = &tab.facet_values[q];
                let wv = wk(phi);
                let wn = wv[0] * side.normal[0] + wv[1] * side.normal[1];
                let (a, b) = (0.5 * wn, 0.5 * wn.abs());
                for i in 0..np {
                    for j in 0..np {
                        local[i * nl + j] += wq * (a + b) * phi[i] * phi[j];
                    }
                    for j in 0..nf {
                        local[i * nl + off + j] += wq * (a - b) * phi[i] * psi[j];
                        local[(off + j) * nl + i] += wq * (-a - b) * psi[j] * phi[i];
                    }
                }
                for i in 0..nf {
                    for j in 0..nf {
                        local[(off + i) * nl + off + j] += wq * (b - a) * psi[i] * psi[j];
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(2 * nl * nl);
        for c in 0..2 {
            LocalVelocity::new(d, k, c).scatter(&local, &mut out);
        }
        out
    });
    Ok(CsrMatrix::from_entries(n, n, entries))
}

/// Pressure coupling `b_h(p, v) = - sum_K int_K p div v + sum_K int_dK (v.n) p_bar`
/// on the single-level layout: rows are element velocity tests, columns are
/// element and facet pressures.
pub fn assemble_b_h(d: &Discretization) -> CsrMatrix {
    let s = d.space();
    let n = s.n_spatial();
    let t = d.tables();
    let (np, nq, nf) = (s.n_velocity_basis(), s.n_pressure_basis(), s.n_facet_basis());
    let entries = parallel_entries(d.n_elements(), |k| {
        let g = d.geometry(k);
        let mut out = Vec::new();
        let mut vol = vec![[0.0; 2]; np * nq];
        for (q, wt) in t.volume_rule.weights.iter().enumerate() {
            let wq = wt * g.det;
            let phi = &t.volume_values[q];
            for i in 0..np {
                let gi = g.physical_gradient(t.volume_gradients[q][i]);
                for l in 0..nq {
                    vol[i * nq + l][0] -= wq * phi[l] * gi[0];
                    vol[i * nq + l][1] -= wq * phi[l] * gi[1];
                }
            }
        }
        for c in 0..2 {
            for i in 0..np {
                for l in 0..nq {
                    out.push((s.spatial_u(k, c, i), s.spatial_p(k, l), vol[i * nq + l][c]));
                }
            }
        }
        for side in d.element_sides(k) {
            let tab = d.side_table(side);
            let mut m = vec![0.0; np * nf];
            for q in 0..tab.weights.len() {
                let wq = tab.weights[q] * side.length;
                for i in 0..np {
                    for l in 0..nf {
                        m[i * nf + l] += wq * tab.element_values[q][i] * tab.facet_values[q][l];
                    }
                }
            }
            for c in 0..2 {
                for i in 0..np {
                    for l in 0..nf {
                        out.push((s.spatial_u(k, c, i), s.spatial_pbar(side.face, l), side.normal[c] * m[i * nf + l]));
                    }
                }
            }
        }
        out
    });
    CsrMatrix::from_entries(n, n, entries)
}

/// Mean-value row `int_Omega p` on the single-level layout (row: the
/// multiplier, columns: element pressures).
pub fn assemble_mean_constraint(d: &Discretization) -> CsrMatrix {
    let s = d.space();
    let n = s.n_spatial();
    let t = d.tables();
    let row = s.spatial_multiplier();
    let mut entries = Vec::new();
    for k in 0..d.n_elements() {
        let det = d.geometry(k).det;
        for l in 0..s.n_pressure_basis() {
            let v: f64 = t.volume_rule.weights.iter().zip(&t.volume_values).map(|(w, phi)| w * phi[l]).sum();
            entries.push((row, s.spatial_p(k, l), det * v));
        }
    }
    CsrMatrix::from_entries(n, n, entries)
}

/// Element velocity mass matrix on the single-level layout.
pub fn assemble_mass(d: &Discretization) -> CsrMatrix {
    let s = d.space();
    let t = d.tables();
    let np = s.n_velocity_basis();
    let entries = parallel_entries(d.n_elements(), |k| {
        let det = d.geometry(k).det;
        let mut out = Vec::new();
        for i in 0..np {
            for j in 0..np {
                let v: f64 = t.volume_rule.weights.iter().zip(&t.volume_values).map(|(w, phi)| w * phi[i] * phi[j]).sum();
                if v.abs() > 1e-15 {
                    for c in 0..2 {
                        out.push((s.spatial_u(k, c, i), s.spatial_u(k, c, j), det * v));
                    }
                }
            }
        }
        out
    });
    CsrMatrix::from_entries(s.n_spatial(), s.n_spatial(), entries)
}

/// `int_{I_n} L_l L_m dt = dt / (2m + 1) delta_lm`.
pub fn temporal_mass(kt: usize, dt: f64) -> Vec<Vec<f64>> {
    (0..=kt).map(|l| (0..=kt).map(|m| if l == m { dt / (2.0 * m as f64 + 1.0) } else { 0.0 }).collect()).collect()
}

/// `T[l][m] = - int_{I_n} L_m d_t L_l dt + L_m(t_{n+1}) L_l(t_{n+1})`, the
/// temporal factor of the upwind time term.
pub fn temporal_transport(kt: usize) -> Vec<Vec<f64>> {
    let b = LegendreBasis::new(kt);
    let rule = crate::basis::quadrature(crate::basis::QuadratureDomain::Interval, 2 * kt).expect("low degree");
    let mut t = vec![vec![1.0; kt + 1]; kt + 1];
    for (p, w) in rule.iter() {
        let v = b.values(p[0]);
        let dv = b.derivatives(p[0]);
        for l in 0..=kt {
            for m in 0..=kt {
                t[l][m] -= w * v[m] * dv[l];
            }
        }
    }
    t
}

/// Upwind time term `M_t` and right-hand side
/// `r = (u_n^-, v_n^+) + int_{I_n} (f, v) dt` with `f` sampled at the
/// temporal quadrature points.
pub fn assemble_time_terms(
    d: &Discretization,
    slab: Slab,
    u_prev: &DiscreteField,
    force: Option<BodyForce>,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let s = d.space();
    if u_prev.role() != FieldRole::ElementVelocity
        || u_prev.n_modes() != 1
        || u_prev.shape() != s.role_shape(FieldRole::ElementVelocity)
    {
        return Err(HdgError::InvalidArgument(
            "incoming trace must be a single-level element velocity on the same space".into(),
        ));
    }
    let kt = s.temporal_degree();
    let nt = s.n_modes();
    let mass = assemble_mass(d);
    let mt = mass.kron(&temporal_transport(kt));
    let mut rhs = vec![0.0; s.n_dofs()];
    let mut prev = vec![0.0; s.n_spatial()];
    let np = s.n_velocity_basis();
    for k in 0..d.n_elements() {
        for c in 0..2 {
            for i in 0..np {
                prev[s.spatial_u(k, c, i)] = u_prev.coefficient(k, c, i, 0);
            }
        }
    }
    let mprev = mass.matvec(&prev);
    let left = d.time_basis().left_values();
    for (sidx, v) in mprev.iter().enumerate() {
        if *v != 0.0 {
            for l in 0..nt {
                rhs[sidx * nt + l] += left[l] * v;
            }
        }
    }
    if let Some(f) = force {
        let t = d.tables();
        let dt = slab.dt();
        let time_points: Vec<(f64, f64, Vec<f64>)> = d
            .time_rule()
            .iter()
            .map(|(p, w)| (slab.time(p[0]), 0.5 * dt * w, d.time_basis().values(p[0])))
            .collect();
        let parts: Vec<Result<Vec<(usize, f64)>>> = (0..d.n_elements())
            .into_par_iter()
            .map(|k| {
                let g = d.geometry(k);
                let mut loc = vec![0.0; 2 * np * nt];
                for (q, wt) in t.volume_rule.weights.iter().enumerate() {
                    let x = g.map(t.volume_rule.points[q]);
                    let phi = &t.volume_values[q];
                    for (tq, wtq, lv) in &time_points {
                        let fv = f(x, *tq);
                        if !fv.iter().all(|v| v.is_finite()) {
                            return Err(HdgError::Data(format!(
                                "body force is not finite at ({}, {}), t = {tq}",
                                x[0], x[1]
                            )));
                        }
                        for c in 0..2 {
                            for i in 0..np {
                                let base = wt * g.det * wtq * fv[c] * phi[i];
                                for l in 0..nt {
                                    loc[(c * np + i) * nt + l] += base * lv[l];
                                }
                            }
                        }
                    }
                }
                let mut out = Vec::with_capacity(loc.len());
                for c in 0..2 {
                    for i in 0..np {
                        for l in 0..nt {
                            out.push((s.u(k, c, i, l), loc[(c * np + i) * nt + l]));
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        for part in parts {
            for (i, v) in part? {
                rhs[i] += v;
            }
        }
    }
    Ok((mt, rhs))
}

/// Slab convection block `int_{I_n} o_h(w(t); u, v) dt` for a slab element
/// velocity `w`, with `w` evaluated at the temporal quadrature points.
pub fn assemble_o_h_slab(d: &Discretization, slab: Slab, w: &DiscreteField) -> Result<CsrMatrix> {
    let s = d.space();
    if w.n_modes() != s.n_modes() {
        return Err(HdgError::InvalidArgument(format!(
            "convection field has {} temporal modes, the slab space {}",
            w.n_modes(),
            s.n_modes()
        )));
    }
    let snap = d.snapshot();
    let nt = s.n_modes();
    let mut total: Option<CsrMatrix> = None;
    for (p, wt) in d.time_rule().iter() {
        let lv = d.time_basis().values(p[0]);
        let outer: Vec<Vec<f64>> = (0..nt).map(|l| (0..nt).map(|m| 0.5 * slab.dt() * wt * lv[l] * lv[m]).collect()).collect();
        let o = assemble_o_h(&snap, &w.at_reference_time(p[0]))?.kron(&outer);
        total = Some(match total {
            None => o,
            Some(acc) => acc.add_scaled(&o, 1.0),
        });
    }
    Ok(total.expect("temporal rule has at least one point"))
}

/// Assembled operator blocks and right-hand side of one slab.
#[derive(Debug, Clone)]
pub struct SlabSystem {
    pub space: SlabSpace,
    pub slab: Slab,
    pub alpha: f64,
    pub nu: f64,
    /// `int_{I_n} a_h dt` (velocity rows and columns).
    pub viscous: CsrMatrix,
    /// `int_{I_n} b_h dt` (velocity rows, pressure columns).
    pub coupling: CsrMatrix,
    /// `int_{I_n} int_Omega p dt` per temporal mode (multiplier rows).
    pub constraint: CsrMatrix,
    /// Upwind time term.
    pub time: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `int_{I_n} o_h(w; ., .) dt` for the current linearisation point.
    pub convection: Option<CsrMatrix>,
}

impl SlabSystem {
    pub fn assemble(
        d: &Discretization,
        slab: Slab,
        alpha: f64,
        nu: f64,
        u_prev: &DiscreteField,
        force: Option<BodyForce>,
    ) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(HdgError::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        let snap = d.snapshot();
        let tm = temporal_mass(d.temporal_degree(), slab.dt());
        let viscous = assemble_a_h(&snap, alpha)?.kron(&tm);
        let coupling = assemble_b_h(&snap).kron(&tm);
        let constraint = assemble_mean_constraint(&snap).kron(&tm);
        let (time, rhs) = assemble_time_terms(d, slab, u_prev, force)?;
        Ok(SlabSystem {
            space: d.space().clone(),
            slab,
            alpha,
            nu,
            viscous,
            coupling,
            constraint,
            time,
            rhs,
            convection: None,
        })
    }

    pub fn set_convection(&mut self, d: &Discretization, w: Option<&DiscreteField>) -> Result<()> {
        self.convection = match w {
            Some(w) => Some(assemble_o_h_slab(d, self.slab, w)?),
            None => None,
        };
        Ok(())
    }

    /// Unconstrained operator
    /// `[M_t + nu A + O, B, 0; -B^T, 0, C^T; 0, C, 0]`.
    pub fn raw_operator(&self) -> CsrMatrix {
        let mut m = self.time.add_scaled(&self.viscous, self.nu);
        if let Some(o) = &self.convection {
            m = m.add_scaled(o, 1.0);
        }
        let bt = self.coupling.transpose();
        let ct = self.constraint.transpose();
        m.add_scaled(&self.coupling, 1.0)
            .add_scaled(&bt, -1.0)
            .add_scaled(&self.constraint, 1.0)
            .add_scaled(&ct, 1.0)
    }

    /// Operator with boundary facet velocity rows and columns replaced by
    /// the identity.
    pub fn operator(&self) -> CsrMatrix {
        let mask = self.space.constrained_mask();
        let raw = self.raw_operator();
        let n = raw.n_rows();
        let mut entries: Vec<Entry> = raw.entries().filter(|&(i, j, _)| !mask[i] && !mask[j]).collect();
        entries.extend((0..n).filter(|&i| mask[i]).map(|i| (i, i, 1.0)));
        CsrMatrix::from_entries(n, n, entries)
    }

    pub fn constrained_rhs(&self) -> Vec<f64> {
        let mask = self.space.constrained_mask();
        self.rhs.iter().zip(&mask).map(|(&r, &m)| if m { 0.0 } else { r }).collect()
    }

    /// Residual `r - K x` of the constrained system.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let k = self.operator().matvec(x);
        self.constrained_rhs().iter().zip(&k).map(|(a, b)| a - b).collect()
    }
}

/// `v^T M u` for velocity pairs on the layout of `space`.
pub fn pair_form(m: &CsrMatrix, space: &SlabSpace, u: &VelocityPair, v: &VelocityPair) -> f64 {
    m.bilinear(&space.pair_vector(v), &space.pair_vector(u))
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

    #[test]
    fn viscous_block_symmetric() {
        let d = disc(2, 2, 0);
        let a = assemble_a_h(&d, 32.0).unwrap();
        assert!(a.symmetry_defect() < 1e-12);
        assert!(assemble_a_h(&d, 0.0).is_err());
    }

    #[test]
    fn zero_convection_field_gives_zero_block() {
        let d = disc(2, 1, 0);
        let o = assemble_o_h(&d, &d.space().zero_field(FieldRole::ElementVelocity)).unwrap();
        assert_eq!(o.max_abs(), 0.0);
    }

    #[test]
    fn temporal_transport_quadratic_form() {
        // Oracle: v^T T v = (v(1)^2 + v(-1)^2) / 2 by integration by parts.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kt in 0..=3 {
            let t = temporal_transport(kt);
            let b = LegendreBasis::new(kt);
            for _ in 0..10 {
                let v: Vec<f64> = (0..=kt).map(|_| rng.random_range(-1.0..1.0)).collect();
                let q: f64 = (0..=kt).map(|l| (0..=kt).map(|m| v[l] * t[l][m] * v[m]).sum::<f64>()).sum();
                let right: f64 = v.iter().sum();
                let left: f64 = v.iter().zip(b.left_values()).map(|(a, b)| a * b).sum();
                assert!((q - 0.5 * (right * right + left * left)).abs() < 1e-12);
            }
        }
        assert_eq!(temporal_transport(0), vec![vec![1.0]]);
    }

    #[test]
    fn zero_data_zero_rhs() {
        let d = disc(2, 1, 1);
        let slab = SpaceTimeLayout::uniform(1.0, 2).unwrap().slab(0);
        let zero = d.snapshot().space().zero_field(FieldRole::ElementVelocity);
        let f = |_: Point, _: f64| [0.0, 0.0];
        let (_, r) = assemble_time_terms(&d, slab, &zero, Some(&f)).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_force_is_data_error() {
        let d = disc(1, 1, 0);
        let slab = SpaceTimeLayout::uniform(1.0, 1).unwrap().slab(0);
        let zero = d.space().zero_field(FieldRole::ElementVelocity);
        let f = |_: Point, t: f64| [1.0 / (t - t), 0.0];
        assert!(matches!(assemble_time_terms(&d, slab, &zero, Some(&f)), Err(HdgError::Data(_))));
    }

    #[test]
    fn constant_pressure_pair_in_kernel_of_coupling() {
        let d = disc(2, 2, 0);
        let b = assemble_b_h(&d);
        let s = d.space();
        let mut x = vec![0.0; s.n_spatial()];
        for k in 0..d.n_elements() {
            x[s.spatial_p(k, 0)] = 1.0 / 2f64.sqrt();
        }
        for f in 0..d.n_faces() {
            x[s.spatial_pbar(f, 0)] = 1.0;
        }
        let r = b.matvec(&x);
        assert!(r.iter().all(|v| v.abs() < 1e-13));
    }
}
