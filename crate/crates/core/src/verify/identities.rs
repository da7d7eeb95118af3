//! Seeded identity suite: the rewritten viscous and convective forms, the
//! dissipation identity of the convective form and the defining identities
//! of the liftings.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{case_seed, fill_random, fmt, random_pair, random_solenoidal, write_csv};
use crate::error::Result;
use crate::forms::{assemble_a_h, assemble_o_h_slab, temporal_mass};
use crate::liftings::{time_lifting, time_lifting_residual, SpatialLifting};
use crate::linalg::CsrMatrix;
use crate::mesh::{Rectangle, Slab, SpatialMesh};
use crate::projections::DivProjector;
use crate::spaces::{DiscreteField, Discretization, FieldRole, VelocityPair};

/// Checked identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityCheck {
    /// Assembled viscous form against `G . G - R . R + penalty`.
    Viscous,
    /// Assembled convective form against the discrete-gradient form, with a
    /// solenoidal convection field.
    Convection,
    /// `o_h(w; v, v)` against `1/2 sum int |w . n| |v - v_bar|^2`.
    Dissipation,
    /// Defining identity of the spatial lifting (absolute residual).
    Lifting,
    /// Defining identity of the discrete gradient (absolute residual).
    DiscreteGradient,
    /// Defining identity of the time lifting (absolute residual).
    TimeLifting,
    /// Lowest-order time lifting against `[u] / dt` (relative).
    TimeLiftingLowest,
}

impl IdentityCheck {
    pub fn name(self) -> &'static str {
        match self {
            IdentityCheck::Viscous => "viscous",
            IdentityCheck::Convection => "convection",
            IdentityCheck::Dissipation => "dissipation",
            IdentityCheck::Lifting => "lifting",
            IdentityCheck::DiscreteGradient => "discrete_gradient",
            IdentityCheck::TimeLifting => "time_lifting",
            IdentityCheck::TimeLiftingLowest => "time_lifting_lowest",
        }
    }
}

/// One check on one random sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub check: IdentityCheck,
    pub n: usize,
    pub ks: usize,
    pub kt: usize,
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative residual for form identities, absolute for defining
    /// identities.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub seed: u64,
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn max_residual(&self, check: IdentityCheck) -> f64 {
        self.rows.iter().filter(|r| r.check == check).map(|r| r.residual).fold(0.0, f64::max)
    }

    /// Smallest value of `o_h(w; v, v)` over the samples.
    pub fn min_dissipation(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.check == IdentityCheck::Dissipation)
            .map(|r| r.lhs)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn samples(&self, check: IdentityCheck) -> usize {
        self.rows.iter().filter(|r| r.check == check).count()
    }

    pub fn merge(&mut self, other: IdentityReport) {
        self.rows.extend(other.rows);
    }

    /// Header `check,n,ks,kt,sample,lhs,rhs,residual`.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.check.name().to_string(),
                    r.n.to_string(),
                    r.ks.to_string(),
                    r.kt.to_string(),
                    r.sample.to_string(),
                    fmt(r.lhs),
                    fmt(r.rhs),
                    fmt(r.residual),
                ]
            })
            .collect();
        write_csv(&["check", "n", "ks", "kt", "sample", "lhs", "rhs", "residual"], &rows)
    }
}

fn relative(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

/// Element values of a single-level field at the volume points of `tables`,
/// `[q][c]` (the degree-`k_s` basis is a prefix of any higher-degree one).
fn volume_values(field: &DiscreteField, k: usize, phi: &[f64]) -> Vec<f64> {
    let (_, nc, nb) = field.shape();
    (0..nc).map(|c| (0..nb).map(|i| field.coefficient(k, c, i, 0) * phi[i]).sum()).collect()
}

/// Right-hand sides of the rewritten viscous form at one time level:
/// `(sum_i int G(u_i) . G(v_i), sum_i int R(u_i) . R(v_i), penalty)`.
fn viscous_terms(d: &Discretization, lift: &SpatialLifting, alpha: f64, u: &VelocityPair, v: &VelocityPair) -> Result<[f64; 3]> {
    let gu = lift.discrete_gradient(d, u)?;
    let gv = lift.discrete_gradient(d, v)?;
    let ru = lift.lift_mismatch(d, u)?;
    let rv = lift.lift_mismatch(d, v)?;
    let mut penalty = 0.0;
    for k in 0..d.n_elements() {
        let hk = d.geometry(k).diameter;
        for side in d.element_sides(k) {
            let tab = d.side_table(side);
            let (np, nf) = (u.element.n_basis(), u.facet.n_basis());
            for (q, w) in tab.weights.iter().enumerate() {
                for c in 0..2 {
                    let mm = |p: &VelocityPair| {
                        let a: f64 = (0..np).map(|i| p.element.coefficient(k, c, i, 0) * tab.element_values[q][i]).sum();
                        let b: f64 = (0..nf).map(|j| p.facet.coefficient(side.face, c, j, 0) * tab.facet_values[q][j]).sum();
                        a - b
                    };
                    penalty += alpha / hk * w * side.length * mm(u) * mm(v);
                }
            }
        }
    }
    Ok([gu.l2_inner(d, &gv), ru.l2_inner(d, &rv), penalty])
}

/// Right-hand sides of the rewritten convective form at one time level:
/// `(int w . G^{2k}(u_i) v_i, sum int 1/2 (w.n + |w.n|)(u - u_bar).(v - v_bar))`.
fn convection_terms(d: &Discretization, lift2: &SpatialLifting, w: &DiscreteField, u: &VelocityPair, v: &VelocityPair) -> Result<[f64; 2]> {
    let g = lift2.discrete_gradient(d, u)?;
    let t = lift2.tables();
    let mut volume = 0.0;
    for k in 0..d.n_elements() {
        let det = d.geometry(k).det;
        for (q, wq) in t.volume_rule.weights.iter().enumerate() {
            let phi = &t.volume_values[q];
            let wv = volume_values(w, k, phi);
            let vv = volume_values(&v.element, k, phi);
            let gv = g.value_with(k, phi);
            for i in 0..2 {
                volume += wq * det * (wv[0] * gv[i * 2] + wv[1] * gv[i * 2 + 1]) * vv[i];
            }
        }
    }
    let face = upwind_face_sum(d, w, u, v, |wn| 0.5 * (wn + wn.abs()));
    Ok([volume, face])
}

/// `sum_K int_dK weight(w . n) (u - u_bar) . (v - v_bar)` with the
/// discretization's side quadrature.
fn upwind_face_sum(d: &Discretization, w: &DiscreteField, u: &VelocityPair, v: &VelocityPair, weight: impl Fn(f64) -> f64) -> f64 {
    let (np, nf) = (u.element.n_basis(), u.facet.n_basis());
    let mut s = 0.0;
    for k in 0..d.n_elements() {
        for side in d.element_sides(k) {
            let tab = d.side_table(side);
            for (q, wq) in tab.weights.iter().enumerate() {
                let phi = &tab.element_values[q];
                let psi = &tab.facet_values[q];
                let wv = volume_values(w, k, phi);
                let wn = wv[0] * side.normal[0] + wv[1] * side.normal[1];
                let mut dot = 0.0;
                for c in 0..2 {
                    let mm = |p: &VelocityPair| {
                        let a: f64 = (0..np).map(|i| p.element.coefficient(k, c, i, 0) * phi[i]).sum();
                        let b: f64 = (0..nf).map(|j| p.facet.coefficient(side.face, c, j, 0) * psi[j]).sum();
                        a - b
                    };
                    dot += mm(u) * mm(v);
                }
                s += wq * side.length * weight(wn) * dot;
            }
        }
    }
    s
}

/// Residual of `int_K G(v_i) . w = int_K grad v_i . w - int_dK (v_i - v_bar_i) w . n`
/// over every basis function `w` of the lifting space, with the right-hand
/// side computed by quadrature of point values.
fn gradient_identity_residual(d: &Discretization, lift: &SpatialLifting, pair: &VelocityPair) -> Result<f64> {
    let g = lift.discrete_gradient(d, pair)?;
    let t = lift.tables();
    let nb = t.n_element();
    let mut worst = 0.0f64;
    for k in 0..d.n_elements() {
        let geo = d.geometry(k);
        for i in 0..2 {
            for dd in 0..2 {
                for a in 0..nb {
                    let mut lhs = 0.0;
                    let mut rhs = 0.0;
                    for (q, wq) in t.volume_rule.weights.iter().enumerate() {
                        let phi = &t.volume_values[q];
                        lhs += wq * geo.det * g.value_with(k, phi)[i * 2 + dd] * phi[a];
                        let xi = t.volume_rule.points[q];
                        let e = d.evaluate_element_reference(&pair.element, k, xi, &[1.0], &[0.0]);
                        rhs += wq * geo.det * e.gradient[i][dd] * phi[a];
                    }
                    for side in d.element_sides(k) {
                        let tab = t.side(side.local_edge, side.flip);
                        for q in 0..tab.weights.len() {
                            let s = tab.face_params[q];
                            let xi = d.side_reference_point(side, s);
                            let ue = d.evaluate_element_reference(&pair.element, k, xi, &[1.0], &[0.0]).value[i];
                            let ub = d.evaluate_facet(&pair.facet, side.face, s, None)?[i];
                            rhs -= tab.weights[q] * side.length * (ue - ub) * tab.element_values[q][a] * side.normal[dd];
                        }
                    }
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Runs `samples` random cases on one discretization. The slab is
/// `[0, 0.5]`; `alpha` is the penalty of the viscous form.
pub fn identity_suite(d: &Discretization, alpha: f64, seed: u64, samples: usize) -> Result<IdentityReport> {
    let n = (d.n_elements() as f64 / 2.0).sqrt().round() as usize;
    let (ks, kt) = (d.spatial_degree(), d.temporal_degree());
    let space = d.space();
    let nt = space.n_modes();
    let slab = Slab { index: 0, start: 0.0, end: 0.5 };
    let snap = d.snapshot();
    let viscous_matrix: CsrMatrix = assemble_a_h(&snap, alpha)?.kron(&temporal_mass(kt, slab.dt()));
    let lift = SpatialLifting::new(d, ks)?;
    let lift2 = SpatialLifting::new(d, 2 * ks)?;
    let div = DivProjector::new(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let row = |check, sample, lhs, rhs, residual| IdentityRow { check, n, ks, kt, sample, lhs, rhs, residual };
    let time_points: Vec<(f64, f64)> = d.time_rule().iter().map(|(p, w)| (p[0], 0.5 * slab.dt() * w)).collect();

    for sample in 0..samples {
        let u = random_pair(space, &mut rng).on_slab(slab);
        let v = random_pair(space, &mut rng).on_slab(slab);
        let w = random_solenoidal(space, &div, &mut rng)?.on_slab(slab);
        let (uv, vv) = (space.pair_vector(&u), space.pair_vector(&v));

        let lhs = viscous_matrix.bilinear(&vv, &uv);
        let mut terms = [0.0; 3];
        for &(s, wt) in &time_points {
            let t = viscous_terms(&snap, &lift, alpha, &u.at_reference_time(s), &v.at_reference_time(s))?;
            for (acc, x) in terms.iter_mut().zip(t) {
                *acc += wt * x;
            }
        }
        let rhs = terms[0] - terms[1] + terms[2];
        let scale = terms.iter().map(|x| x.abs()).sum::<f64>();
        rows.push(row(IdentityCheck::Viscous, sample, lhs, rhs, relative(lhs, rhs, scale)));

        let conv = assemble_o_h_slab(d, slab, &w)?;
        let lhs = conv.bilinear(&vv, &uv);
        let mut terms = [0.0; 2];
        for &(s, wt) in &time_points {
            let t = convection_terms(&snap, &lift2, &w.at_reference_time(s), &u.at_reference_time(s), &v.at_reference_time(s))?;
            terms[0] += wt * t[0];
            terms[1] += wt * t[1];
        }
        let rhs = terms[0] + terms[1];
        rows.push(row(IdentityCheck::Convection, sample, lhs, rhs, relative(lhs, rhs, terms[0].abs() + terms[1].abs())));

        let lhs = conv.bilinear(&vv, &vv);
        let mut rhs = 0.0;
        for &(s, wt) in &time_points {
            let vs = v.at_reference_time(s);
            rhs += wt * upwind_face_sum(&snap, &w.at_reference_time(s), &vs, &vs, |wn| 0.5 * wn.abs());
        }
        rows.push(row(IdentityCheck::Dissipation, sample, lhs, rhs, relative(lhs, rhs, rhs.abs())));

        let u0 = u.at_reference_time(0.0);
        let r = lift.lift_mismatch(&snap, &u0)?;
        let res = lift.identity_residual(&snap, &r, |i, side, s| {
            let xi = snap.side_reference_point(side, s);
            let ue = snap.evaluate_element_reference(&u0.element, side.element, xi, &[1.0], &[0.0]).value[i];
            let ub = snap.evaluate_facet(&u0.facet, side.face, s, None).expect("parameter in range")[i];
            ue - ub
        });
        rows.push(row(IdentityCheck::Lifting, sample, 0.0, 0.0, res));

        let res = gradient_identity_residual(&snap, &lift, &u0)?;
        rows.push(row(IdentityCheck::DiscreteGradient, sample, 0.0, 0.0, res));

        let mut incoming = space.with_temporal_degree(0).zero_field(FieldRole::ElementVelocity);
        fill_random(&mut incoming, &mut rng);
        let lifted = time_lifting(slab, &u.element, Some(&incoming))?;
        let jump = u.element.time_jump(&incoming);
        let res = time_lifting_residual(d, slab, &lifted, &jump);
        rows.push(row(IdentityCheck::TimeLifting, sample, 0.0, 0.0, res));
        if nt == 1 {
            let expected = jump.scaled(1.0 / slab.dt());
            let diff = lifted.without_slab().axpy(-1.0, &expected).max_abs();
            rows.push(row(IdentityCheck::TimeLiftingLowest, sample, 0.0, 0.0, relative(diff, 0.0, expected.max_abs())));
        }
    }
    Ok(IdentityReport { seed, rows })
}

/// Runs [`identity_suite`] on every combination of mesh resolution and
/// degrees, with penalty `8 k_s^2` and `samples` fields per combination.
pub fn identity_suite_grid(ns: &[usize], kss: &[usize], kts: &[usize], seed: u64, samples: usize) -> Result<IdentityReport> {
    let mut report = IdentityReport { seed, rows: Vec::new() };
    let mut case = 0u64;
    for &n in ns {
        let mesh = SpatialMesh::build_uniform(n, Rectangle::unit_square())?;
        for &ks in kss {
            for &kt in kts {
                let d = Discretization::new(mesh.clone(), ks, kt)?;
                report.merge(identity_suite(&d, 8.0 * (ks * ks) as f64, case_seed(seed, case), samples)?);
                case += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(n: usize, ks: usize, kt: usize) -> Discretization {
        Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap(), ks, kt).unwrap()
    }

    #[test]
    fn identities_hold_on_small_mesh() {
        let report = identity_suite(&disc(2, 2, 1), 32.0, 7, 3).unwrap();
        for check in [IdentityCheck::Viscous, IdentityCheck::Convection, IdentityCheck::Dissipation] {
            assert!(report.max_residual(check) < 1e-10, "{check:?}: {}", report.max_residual(check));
        }
        for check in [IdentityCheck::Lifting, IdentityCheck::DiscreteGradient, IdentityCheck::TimeLifting] {
            assert!(report.max_residual(check) < 1e-11, "{check:?}: {}", report.max_residual(check));
        }
        assert!(report.min_dissipation() >= -1e-12);
    }

    #[test]
    fn seed_determinism() {
        let d = disc(2, 1, 0);
        let a = identity_suite(&d, 8.0, 11, 2).unwrap();
        let b = identity_suite(&d, 8.0, 11, 2).unwrap();
        assert_eq!(a, b);
        assert!(a.max_residual(IdentityCheck::TimeLiftingLowest) < 1e-13);
    }
}
