//! Refinement studies: errors against a manufactured solution, Cauchy
//! increments, asymptotic-consistency residuals, projection rates and the
//! discrete equicontinuity probe.

use rayon::prelude::*;

use super::{LevelRecord, RefinementStudy};
use crate::basis::{quadrature, LegendreBasis, QuadratureDomain, ReferenceTables};
use crate::error::{HdgError, Result};
use crate::forms::{assemble_a_h, assemble_o_h_slab, temporal_mass};
use crate::mesh::{Point, Rectangle, Slab, SpaceTimeLayout, SpatialMesh};
use crate::projections::{eval_time, interpolate_pair, project_time, DivProjector, TensorTestFunction};
use crate::solver::{profile, profile_gradient, run_simulation, ExactSolution, ProblemData, SimulationResult, SolverConfig};
use crate::spaces::{integrated_l2_norm_sq, mismatch_norm_sq, DiscreteField, Discretization, VelocityPair};

/// Joint `(h, tau)` refinement of a benchmark run. Level `l` uses a
/// `base_n 2^l` mesh and `base_slabs 2^l` slabs.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub data: ProblemData,
    pub config: SolverConfig,
    pub ks: usize,
    pub kt: usize,
    pub base_n: usize,
    pub base_slabs: usize,
    pub levels: usize,
}

/// Discretization and run of one level.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub n: usize,
    pub slabs: usize,
    pub discretization: Discretization,
    pub layout: SpaceTimeLayout,
    pub run: SimulationResult,
}

impl ConvergenceStudy {
    /// Solves every level; a level whose run does not complete is an error.
    pub fn solve_levels(&self) -> Result<Vec<LevelRun>> {
        (0..self.levels)
            .map(|l| {
                let n = self.base_n << l;
                let slabs = self.base_slabs << l;
                let mesh = SpatialMesh::build_uniform(n, self.data.domain)?;
                let d = self.config.discretization(mesh, self.ks, self.kt)?;
                let layout = SpaceTimeLayout::uniform(self.data.final_time, slabs)?;
                let run = run_simulation(&d, &layout, &self.data, &self.config)?;
                if !run.completed() {
                    return Err(HdgError::Configuration(format!(
                        "Picard iteration did not converge on level {l} ({:?})",
                        run.status
                    )));
                }
                Ok(LevelRun { n, slabs, discretization: d, layout, run })
            })
            .collect()
    }
}

fn level_record(l: usize, r: &LevelRun, values: Vec<f64>) -> LevelRecord {
    LevelRecord { level: l, n: r.n, slabs: r.slabs, h: r.discretization.mesh().mesh_size(), tau: r.layout.tau(), values }
}

/// High-order rules for error integrals.
struct ErrorRules {
    tables: ReferenceTables,
    time: Vec<(f64, f64)>,
}

impl ErrorRules {
    fn new(d: &Discretization) -> Result<Self> {
        let ks = d.spatial_degree();
        let tables = d.tables_of_degree(ks, 2 * ks + 8)?;
        let rule = quadrature(QuadratureDomain::Interval, 2 * d.temporal_degree() + 8)?;
        Ok(ErrorRules { tables, time: rule.iter().map(|(p, w)| (p[0], w)).collect() })
    }
}

fn values_at(field: &DiscreteField, k: usize, phi: &[f64]) -> [f64; 2] {
    let nb = field.n_basis();
    let mut v = [0.0; 2];
    for (c, vc) in v.iter_mut().enumerate() {
        *vc = (0..nb).map(|i| field.coefficient(k, c, i, 0) * phi[i]).sum();
    }
    v
}

fn gradients_at(d: &Discretization, field: &DiscreteField, k: usize, dphi: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let g = d.geometry(k);
    let mut out = [[0.0; 2]; 2];
    for (c, row) in out.iter_mut().enumerate() {
        let mut r = [0.0; 2];
        for (i, dp) in dphi.iter().enumerate().take(field.n_basis()) {
            let a = field.coefficient(k, c, i, 0);
            r[0] += a * dp[0];
            r[1] += a * dp[1];
        }
        *row = g.physical_gradient(r);
    }
    out
}

/// `(int |u - u_h|^2, int (|grad(u - u_h)|^2 + sum h^{-1} |u_h - u_bar_h|^2))`
/// over the whole run.
fn errors(d: &Discretization, rules: &ErrorRules, run: &SimulationResult, exact: &ExactSolution) -> (f64, f64) {
    let t = &rules.tables;
    let mut l2 = 0.0;
    let mut energy = 0.0;
    for state in &run.states {
        let dt = state.slab.dt();
        for &(s, wt) in &rules.time {
            let time = state.slab.time(s);
            let pair = state.velocity.at_reference_time(s);
            let per_element: Vec<(f64, f64)> = (0..d.n_elements())
                .into_par_iter()
                .map(|k| {
                    let g = d.geometry(k);
                    let (mut a, mut b) = (0.0, 0.0);
                    for (q, w) in t.volume_rule.weights.iter().enumerate() {
                        let x = g.map(t.volume_rule.points[q]);
                        let uh = values_at(&pair.element, k, &t.volume_values[q]);
                        let gh = gradients_at(d, &pair.element, k, &t.volume_gradients[q]);
                        let u = (exact.velocity)(x, time);
                        let gu = (exact.gradient)(x, time);
                        for c in 0..2 {
                            a += w * g.det * (u[c] - uh[c]).powi(2);
                            for dd in 0..2 {
                                b += w * g.det * (gu[c][dd] - gh[c][dd]).powi(2);
                            }
                        }
                    }
                    (a, b)
                })
                .collect();
            let (a, b) = per_element.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
            l2 += 0.5 * dt * wt * a;
            energy += 0.5 * dt * wt * (b + mismatch_norm_sq(d, &pair));
        }
    }
    (l2, energy)
}

/// `int |u_coarse - u_fine|^2` integrated on the fine space-time mesh.
fn cauchy_increment(coarse: &LevelRun, fine: &LevelRun, rules: &ErrorRules) -> Result<f64> {
    let dc = &coarse.discretization;
    let df = &fine.discretization;
    let t = &rules.tables;
    let located: Vec<Vec<(usize, Vec<f64>)>> = (0..df.n_elements())
        .into_par_iter()
        .map(|k| {
            let g = df.geometry(k);
            t.volume_rule
                .points
                .iter()
                .map(|&p| {
                    let x = g.map(p);
                    let (kc, xi) = dc.mesh().locate(x).ok_or_else(|| {
                        HdgError::Domain(format!("point ({}, {}) is outside the coarse mesh", x[0], x[1]))
                    })?;
                    Ok((kc, dc.tables().element_basis.values(xi)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for state in &fine.run.states {
        let dt = state.slab.dt();
        for &(s, wt) in &rules.time {
            let time = state.slab.time(s);
            let cstate = coarse
                .run
                .states
                .iter()
                .find(|c| c.slab.contains(time))
                .ok_or_else(|| HdgError::Domain(format!("time {time} outside the coarse run")))?;
            let uf = state.velocity.element.at_reference_time(s);
            let uc = cstate.velocity.element.at_reference_time(cstate.slab.reference(time));
            let mut acc = 0.0;
            for (k, pts) in located.iter().enumerate() {
                let det = df.geometry(k).det;
                for (q, (kc, phi_c)) in pts.iter().enumerate() {
                    let a = values_at(&uf, k, &t.volume_values[q]);
                    let b = values_at(&uc, *kc, phi_c);
                    acc += t.volume_rule.weights[q] * det * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
                }
            }
            total += 0.5 * dt * wt * acc;
        }
    }
    Ok(total)
}

pub const CONVERGENCE_METRICS: [&str; 3] = ["l2l2_error", "energy_error", "cauchy_increment"];

/// Errors and Cauchy increments of already solved levels.
pub fn convergence_metrics(data: &ProblemData, levels: &[LevelRun]) -> Result<RefinementStudy> {
    let exact = data
        .exact
        .as_ref()
        .ok_or_else(|| HdgError::Precondition("a convergence study needs a manufactured solution".into()))?;
    let mut records = Vec::with_capacity(levels.len());
    for (l, r) in levels.iter().enumerate() {
        let rules = ErrorRules::new(&r.discretization)?;
        let (l2, energy) = errors(&r.discretization, &rules, &r.run, exact);
        let cauchy = match levels.get(l + 1) {
            Some(fine) => cauchy_increment(r, fine, &ErrorRules::new(&fine.discretization)?)?.sqrt(),
            None => f64::NAN,
        };
        records.push(level_record(l, r, vec![l2.sqrt(), energy.sqrt(), cauchy]));
    }
    RefinementStudy::new(CONVERGENCE_METRICS.iter().map(|s| s.to_string()).collect(), records)
}

/// Solves all levels and measures errors and Cauchy increments.
pub fn convergence_study(study: &ConvergenceStudy) -> Result<RefinementStudy> {
    convergence_metrics(&study.data, &study.solve_levels()?)
}

pub const CONSISTENCY_METRICS: [&str; 3] = ["viscous", "convective", "viscous_interpolant"];

/// Temporal L2 projection of a slab-dependent spatial pair, from samples at
/// the slab's temporal quadrature points.
fn interpolant_on_slab(d: &Discretization, slab: Slab, u: &(dyn Fn(Point, f64) -> [f64; 2] + Sync)) -> VelocityPair {
    let nt = d.space().n_modes();
    let basis = LegendreBasis::new(nt - 1);
    let mut pair = d.space().zero_pair();
    for (p, w) in d.time_rule().iter() {
        let t = slab.time(p[0]);
        let lv = basis.values(p[0]);
        let g = |x: Point| u(x, t);
        let snap = interpolate_pair(d, &g);
        for (dst, src) in [(&mut pair.element, &snap.element), (&mut pair.facet, &snap.facet)] {
            for (b, &v) in src.coefficients().iter().enumerate() {
                for m in 0..nt {
                    dst.coefficients_mut()[b * nt + m] += 0.5 * (2.0 * m as f64 + 1.0) * w * lv[m] * v;
                }
            }
        }
    }
    pair.on_slab(slab)
}

/// `(int int grad u : grad phi, int int (u . grad u) . phi)` on one slab.
fn exact_consistency_terms(d: &Discretization, rules: &ErrorRules, slab: Slab, exact: &ExactSolution, test: &TensorTestFunction) -> (f64, f64) {
    let t = &rules.tables;
    let mut visc = 0.0;
    let mut conv = 0.0;
    for &(s, wt) in &rules.time {
        let time = slab.time(s);
        let parts: Vec<(f64, f64)> = (0..d.n_elements())
            .into_par_iter()
            .map(|k| {
                let g = d.geometry(k);
                let (mut a, mut b) = (0.0, 0.0);
                for (q, w) in t.volume_rule.weights.iter().enumerate() {
                    let x = g.map(t.volume_rule.points[q]);
                    let gu = (exact.gradient)(x, time);
                    let u = (exact.velocity)(x, time);
                    let phi = test.value(x, time);
                    let gphi = test.gradient(x, time);
                    for c in 0..2 {
                        for dd in 0..2 {
                            a += w * g.det * gu[c][dd] * gphi[c][dd];
                        }
                        b += w * g.det * (u[0] * gu[c][0] + u[1] * gu[c][1]) * phi[c];
                    }
                }
                (a, b)
            })
            .collect();
        for (a, b) in parts {
            visc += 0.5 * slab.dt() * wt * a;
            conv += 0.5 * slab.dt() * wt * b;
        }
    }
    (visc, conv)
}

/// Per level: `|int a_h(u_h, (Pi phi, Pi_bar phi)) - int int grad u : grad phi|`,
/// `|int o_h(u_h; u_h, (Pi phi, Pi_bar phi)) - int int (u . grad u) . phi|`
/// and the viscous residual with `u_h` replaced by the interpolant of `u`.
pub fn consistency_residuals(data: &ProblemData, levels: &[LevelRun], test: &TensorTestFunction, alpha: f64) -> Result<RefinementStudy> {
    let exact = data
        .exact
        .as_ref()
        .ok_or_else(|| HdgError::Precondition("consistency residuals need a manufactured solution".into()))?;
    let mut records = Vec::with_capacity(levels.len());
    for (l, r) in levels.iter().enumerate() {
        let d = &r.discretization;
        let rules = ErrorRules::new(d)?;
        let space = d.space();
        let div = DivProjector::new(d);
        let a_spatial = assemble_a_h(&d.snapshot(), alpha)?;
        let (mut visc, mut conv, mut interp) = (0.0, 0.0, 0.0);
        let (mut visc_exact, mut conv_exact) = (0.0, 0.0);
        for state in &r.run.states {
            let slab = state.slab;
            let phi = test.project(d, slab, &div)?;
            let pv = space.pair_vector(&phi);
            let uv = space.pair_vector(&state.velocity);
            let a = a_spatial.kron(&temporal_mass(d.temporal_degree(), slab.dt()));
            visc += a.bilinear(&pv, &uv);
            if data.convection {
                conv += assemble_o_h_slab(d, slab, &state.velocity.element)?.bilinear(&pv, &uv);
            }
            let ui = interpolant_on_slab(d, slab, &*exact.velocity);
            interp += a.bilinear(&pv, &space.pair_vector(&ui));
            let (ve, ce) = exact_consistency_terms(d, &rules, slab, exact, test);
            visc_exact += ve;
            conv_exact += ce;
        }
        let conv_res = if data.convection { (conv - conv_exact).abs() } else { f64::NAN };
        records.push(level_record(l, r, vec![(visc - visc_exact).abs(), conv_res, (interp - visc_exact).abs()]));
    }
    RefinementStudy::new(CONSISTENCY_METRICS.iter().map(|s| s.to_string()).collect(), records)
}

/// Approximation orders of the temporal projection and of the
/// divergence-free projection on uniformly refined meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionStudy {
    pub ks: usize,
    pub kt: usize,
    pub base_n: usize,
    pub levels: usize,
}

pub const PROJECTION_METRICS: [&str; 4] = ["time_linf", "div_l2", "div_h1", "div_linf"];

/// Smooth temporal profile used by the projection study.
fn time_profile(t: f64) -> f64 {
    (3.0 * t).sin().exp()
}

/// Level `l` projects `exp(sin 3t)` on `base_n 2^l` slabs of `[0, 1]` and the
/// solenoidal benchmark profile onto `V_h^div` on the `base_n 2^l` mesh.
pub fn projection_rates(study: &ProjectionStudy) -> Result<RefinementStudy> {
    let mut records = Vec::with_capacity(study.levels);
    for l in 0..study.levels {
        let n = study.base_n << l;
        let layout = SpaceTimeLayout::uniform(1.0, n)?;
        let mut time_err = 0.0f64;
        for slab in layout.slabs() {
            let c = project_time(&time_profile, slab, study.kt);
            for j in 0..=20 {
                let t = slab.start + slab.dt() * j as f64 / 20.0;
                time_err = time_err.max((time_profile(t) - eval_time(&c, slab, t)).abs());
            }
        }
        let d = Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, study.ks, 0)?;
        let p = DivProjector::new(&d).project(&d, &profile)?;
        let t = d.tables_of_degree(study.ks, 2 * study.ks + 8)?;
        let (mut l2, mut h1, mut linf) = (0.0, 0.0, 0.0f64);
        for k in 0..d.n_elements() {
            let g = d.geometry(k);
            for (q, w) in t.volume_rule.weights.iter().enumerate() {
                let x = g.map(t.volume_rule.points[q]);
                let v = values_at(&p, k, &t.volume_values[q]);
                let gv = gradients_at(&d, &p, k, &t.volume_gradients[q]);
                let u = profile(x);
                let gu = profile_gradient(x);
                for c in 0..2 {
                    l2 += w * g.det * (u[c] - v[c]).powi(2);
                    for dd in 0..2 {
                        h1 += w * g.det * (gu[c][dd] - gv[c][dd]).powi(2);
                    }
                }
                linf = linf.max((u[0] - v[0]).hypot(u[1] - v[1]));
            }
            for xi in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
                let v = d.evaluate_element_reference(&p, k, xi, &[1.0], &[0.0]).value;
                let u = profile(g.map(xi));
                linf = linf.max((u[0] - v[0]).hypot(u[1] - v[1]));
            }
        }
        records.push(LevelRecord {
            level: l,
            n,
            slabs: n,
            h: d.mesh().mesh_size(),
            tau: layout.tau(),
            values: vec![time_err, l2.sqrt(), (l2 + h1).sqrt(), linf],
        });
    }
    RefinementStudy::new(PROJECTION_METRICS.iter().map(|s| s.to_string()).collect(), records)
}

/// `int_delta^T |u_h(t) - u_h(t - delta)|^2 dt` for one shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicontinuityPoint {
    pub delta: f64,
    pub value: f64,
}

/// Shifts `delta = tau, 2 tau, 4 tau` (those shorter than the run) on a
/// uniform time partition.
pub fn equicontinuity_probe(d: &Discretization, run: &SimulationResult) -> Vec<EquicontinuityPoint> {
    let n = run.states.len();
    [1usize, 2, 4]
        .into_iter()
        .filter(|&j| j < n)
        .map(|j| {
            let value = (j..n)
                .map(|i| {
                    let a = &run.states[i];
                    let b = &run.states[i - j];
                    let diff = a.velocity.element.axpy(-1.0, &b.velocity.element);
                    integrated_l2_norm_sq(d, a.slab.dt(), &diff)
                })
                .sum();
            EquicontinuityPoint { delta: j as f64 * run.states[0].slab.dt(), value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::zero_problem;

    #[test]
    fn zero_solution_has_zero_error() {
        let study = ConvergenceStudy {
            data: zero_problem(0.1, 0.5),
            config: SolverConfig::default(),
            ks: 1,
            kt: 0,
            base_n: 2,
            base_slabs: 1,
            levels: 3,
        };
        let s = convergence_study(&study).unwrap();
        for l in &s.levels {
            assert_eq!(l.values[0], 0.0);
            assert_eq!(l.values[1], 0.0);
        }
    }

    #[test]
    fn time_projection_order() {
        let s = projection_rates(&ProjectionStudy { ks: 1, kt: 1, base_n: 8, levels: 3 }).unwrap();
        assert!((s.order("time_linf").unwrap() - 2.0).abs() < 0.3);
        assert!((s.order("div_l2").unwrap() - 2.0).abs() < 0.3);
    }
}
