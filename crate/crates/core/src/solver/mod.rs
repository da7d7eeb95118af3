//! Slab-by-slab solution of the space-time HDG scheme: Picard iteration in
//! the convection field, sparse direct solves (optionally statically
//! condensed) and time marching with a per-slab energy ledger.

mod benchmarks;
mod condensation;

pub use benchmarks::{profile, profile_gradient, profile_laplacian, stokes_steady, taylor_green, zero_problem, Benchmark};
pub use condensation::solve_condensed;

use std::fmt;
use std::sync::Arc;

use crate::error::{HdgError, Result};
use crate::forms::{assemble_o_h_slab, assemble_time_terms, BodyForce, SlabSystem};
use crate::linalg::{solve_sparse, CsrMatrix, Entry};
use crate::mesh::{Point, Rectangle, Slab, SpaceTimeLayout, SpatialMesh};
use crate::projections::DivProjector;
use crate::spaces::{
    conformity, integrated_norm_v_sq, l2_norm, Conformity, DiscreteField, Discretization, FieldRole, SlabSpace,
    VelocityPair,
};

/// A function of space and time shared between threads.
pub type SpaceTimeFn<T> = Arc<dyn Fn(Point, f64) -> T + Send + Sync>;

/// A function of space shared between threads.
pub type SpaceFn<T> = Arc<dyn Fn(Point) -> T + Send + Sync>;

/// Analytic velocity, velocity gradient (`[c][d] = d_d u_c`) and pressure.
#[derive(Clone)]
pub struct ExactSolution {
    pub velocity: SpaceTimeFn<[f64; 2]>,
    pub gradient: SpaceTimeFn<[[f64; 2]; 2]>,
    pub pressure: SpaceTimeFn<f64>,
}

/// Viscosity, forcing, initial velocity, final time and domain.
#[derive(Clone)]
pub struct ProblemData {
    pub name: String,
    pub nu: f64,
    pub final_time: f64,
    pub domain: Rectangle,
    /// `false` drops the convection term (Stokes flow).
    pub convection: bool,
    /// Body force; `None` means `f = 0`.
    pub force: Option<SpaceTimeFn<[f64; 2]>>,
    pub initial: SpaceFn<[f64; 2]>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .field("final_time", &self.final_time)
            .field("domain", &self.domain)
            .field("convection", &self.convection)
            .field("force", &self.force.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemData {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(HdgError::InvalidArgument(format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(HdgError::InvalidArgument(format!("final time must be positive, got {}", self.final_time)));
        }
        Ok(())
    }

    pub fn body_force(&self) -> Option<BodyForce<'_>> {
        self.force.as_deref().map(|f| f as BodyForce)
    }

    /// Same data without forcing.
    pub fn unforced(&self) -> ProblemData {
        ProblemData { force: None, exact: None, ..self.clone() }
    }
}

/// Penalty, Picard controls and linear-solver options.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Interior penalty; `None` selects `8 k_s^2`.
    pub alpha: Option<f64>,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relaxation of the convection field, `w <- theta u + (1 - theta) w`.
    pub damping: f64,
    pub static_condensation: bool,
    /// Polynomial exactness of the spatial rule (default `3 k_s + 2`).
    pub space_quadrature: Option<usize>,
    /// Polynomial exactness of the temporal rule (default `3 k_t + 2`).
    pub time_quadrature: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: None,
            tolerance: 1e-10,
            max_iterations: 50,
            damping: 1.0,
            static_condensation: false,
            space_quadrature: None,
            time_quadrature: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(HdgError::InvalidArgument(format!("Picard tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(HdgError::InvalidArgument("at least one Picard iteration is required".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(HdgError::InvalidArgument(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(HdgError::InvalidArgument(format!("penalty must be positive, got {a}")));
            }
        }
        Ok(())
    }

    pub fn penalty(&self, ks: usize) -> f64 {
        self.alpha.unwrap_or(8.0 * (ks * ks) as f64)
    }

    /// Discretization with this configuration's quadrature overrides.
    pub fn discretization(&self, mesh: SpatialMesh, ks: usize, kt: usize) -> Result<Discretization> {
        Discretization::with_quadrature(
            mesh,
            ks,
            kt,
            self.space_quadrature.unwrap_or(3 * ks + 2),
            self.time_quadrature.unwrap_or(3 * kt + 2),
        )
    }
}

/// Terms of the slab energy balance
/// `|u_{n+1}^-|^2 + |[u]_n|^2 + 2 int (nu a_h + o_h) = |u_n^-|^2 + 2 int (f, u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlabEnergy {
    pub incoming_sq: f64,
    pub outgoing_sq: f64,
    pub jump_sq: f64,
    /// `nu int a_h(u, u) dt`.
    pub viscous: f64,
    /// `int o_h(u; u, u) dt`.
    pub convective: f64,
    /// `int (f, u) dt`.
    pub forcing: f64,
}

impl SlabEnergy {
    pub fn lhs(&self) -> f64 {
        self.outgoing_sq + self.jump_sq + 2.0 * (self.viscous + self.convective)
    }

    pub fn rhs(&self) -> f64 {
        self.incoming_sq + 2.0 * self.forcing
    }

    /// Sum of the magnitudes of all terms.
    pub fn scale(&self) -> f64 {
        self.outgoing_sq
            + self.jump_sq
            + 2.0 * (self.viscous.abs() + self.convective.abs())
            + self.incoming_sq
            + 2.0 * self.forcing.abs()
    }

    pub fn relative_residual(&self) -> f64 {
        relative(self.lhs() - self.rhs(), self.scale())
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

/// Solution on one slab together with solver diagnostics.
#[derive(Debug, Clone)]
pub struct SlabState {
    pub slab: Slab,
    /// Full coefficient vector on the slab layout.
    pub solution: Vec<f64>,
    pub velocity: VelocityPair,
    pub pressure: DiscreteField,
    pub facet_pressure: DiscreteField,
    /// `u(t_n^-)`.
    pub incoming: DiscreteField,
    /// `u(t_{n+1}^-)`.
    pub outgoing: DiscreteField,
    pub iterations: usize,
    pub converged: bool,
    /// Relative Picard increments, one per iteration.
    pub increments: Vec<f64>,
    /// Relative residual of the nonlinear slab system at the returned state.
    pub residual: f64,
    /// Max `|b_h(q, u)|` over pressure basis functions.
    pub divergence_residual: f64,
    pub energy: SlabEnergy,
    /// Conformity over the sampled times of the slab.
    pub conformity: Conformity,
    /// Max `||u_h(t)||_{L^2}` over the sampled times of the slab.
    pub max_sampled_l2: f64,
}

/// `u_0^- = Pi^div u_0`.
pub fn initial_trace(d: &Discretization, data: &ProblemData) -> Result<DiscreteField> {
    DivProjector::new(d).project(d, &*data.initial)
}

fn singular_to_configuration(e: HdgError) -> HdgError {
    match e {
        HdgError::Singular(m) => HdgError::Configuration(format!("slab system is singular: {m}")),
        other => other,
    }
}

fn solve(system: &SlabSystem, condensed: bool) -> Result<Vec<f64>> {
    let k = system.operator();
    let r = system.constrained_rhs();
    let space = &system.space;
    let run = |a: &CsrMatrix, b: &[f64]| if condensed { solve_condensed(a, b, space) } else { solve_sparse(a, b) };
    let (kp, rp) = pinned_system(space, &k, &r);
    if let Ok(mut x) = run(&kp, &rp) {
        zero_mean_pressure(space, &k, &mut x);
        if full_residual(&k, &x, &r) <= 1e-10 {
            return Ok(x);
        }
    }
    run(&k, &r).map_err(singular_to_configuration)
}

/// Pressure is fixed only up to one constant per temporal mode, removed by
/// the mean-value multipliers. Their rows and columns are dense after
/// elimination, so the factorised system instead pins the lowest facet
/// pressure coefficient of face 0 per mode and sets the multipliers to zero.
fn pinned_system(space: &SlabSpace, k: &CsrMatrix, r: &[f64]) -> (CsrMatrix, Vec<f64>) {
    let n = k.n_rows();
    let mut fixed = vec![false; n];
    let mut multiplier = vec![false; n];
    for m in 0..space.n_modes() {
        fixed[space.pbar(0, 0, m)] = true;
        fixed[space.multiplier(m)] = true;
        multiplier[space.multiplier(m)] = true;
    }
    let mut entries: Vec<Entry> = k.entries().filter(|&(i, j, _)| !fixed[i] && !multiplier[j]).collect();
    entries.extend((0..n).filter(|&i| fixed[i]).map(|i| (i, i, 1.0)));
    let rhs = r.iter().zip(&fixed).map(|(&v, &f)| if f { 0.0 } else { v }).collect();
    (CsrMatrix::from_entries(n, n, entries), rhs)
}

/// Adds the constant pressure per mode that makes the multiplier rows of
/// `k` vanish.
fn zero_mean_pressure(space: &SlabSpace, k: &CsrMatrix, x: &mut [f64]) {
    let element_constant = 1.0 / std::f64::consts::SQRT_2;
    for m in 0..space.n_modes() {
        let mut z = vec![0.0; x.len()];
        for e in 0..space.n_elements() {
            z[space.p(e, 0, m)] = element_constant;
        }
        for f in 0..space.n_faces() {
            z[space.pbar(f, 0, m)] = 1.0;
        }
        let row = space.multiplier(m);
        let cx: f64 = k.row(row).map(|(j, v)| v * x[j]).sum();
        let cz: f64 = k.row(row).map(|(j, v)| v * z[j]).sum();
        if cz != 0.0 {
            let shift = cx / cz;
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi -= shift * zi;
            }
        }
    }
}

/// `max |K x - r| / (|K| |x| + |r|)`.
fn full_residual(k: &CsrMatrix, x: &[f64], r: &[f64]) -> f64 {
    let kx = k.matvec(x);
    let res = kx.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = k.max_abs() * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    relative(res, scale)
}

/// Reference times in `[-1, 1]` used for slab diagnostics: the endpoints and
/// the temporal quadrature points.
fn sample_times(d: &Discretization) -> Vec<f64> {
    let mut s = vec![-1.0, 1.0];
    s.extend(d.time_rule().points.iter().map(|p| p[0]));
    s
}

/// Solves one slab by Picard iteration started from the constant-in-time
/// extension of `incoming`. Nonconvergence is reported in the returned
/// state, not as an error.
pub fn picard_solve_slab(
    d: &Discretization,
    slab: Slab,
    incoming: &DiscreteField,
    data: &ProblemData,
    config: &SolverConfig,
) -> Result<SlabState> {
    data.validate()?;
    config.validate()?;
    let space = d.space();
    let nt = space.n_modes();
    let alpha = config.penalty(d.spatial_degree());
    let mut system = SlabSystem::assemble(d, slab, alpha, data.nu, incoming, data.body_force())?;

    let mut w = incoming.extend_in_time(nt).on_slab(slab);
    let mut previous = VelocityPair { element: w.clone(), facet: space.zero_field(FieldRole::FacetVelocity).on_slab(slab) };
    let mut increments = Vec::new();
    let mut converged = false;
    let mut x = Vec::new();
    let iterations_allowed = if data.convection { config.max_iterations } else { 1 };
    for _ in 0..iterations_allowed {
        if data.convection {
            system.set_convection(d, Some(&w))?;
        }
        x = solve(&system, config.static_condensation)?;
        let current = space.extract_pair(&x).on_slab(slab);
        let diff = current.axpy(-1.0, &previous);
        let inc = integrated_norm_v_sq(d, slab.dt(), &diff).sqrt();
        let size = integrated_norm_v_sq(d, slab.dt(), &current).sqrt();
        let rel = relative(inc, size);
        increments.push(rel);
        w = if config.damping == 1.0 {
            current.element.clone()
        } else {
            current.element.scaled(config.damping).axpy(1.0 - config.damping, &w)
        };
        previous = current;
        if !data.convection || rel <= config.tolerance || inc == 0.0 {
            converged = true;
            break;
        }
    }
    finish_state(d, slab, incoming, data, system, x, increments, converged)
}

#[allow(clippy::too_many_arguments)]
fn finish_state(
    d: &Discretization,
    slab: Slab,
    incoming: &DiscreteField,
    data: &ProblemData,
    mut system: SlabSystem,
    x: Vec<f64>,
    increments: Vec<f64>,
    converged: bool,
) -> Result<SlabState> {
    let space = d.space().clone();
    let velocity = space.extract_pair(&x).on_slab(slab);
    let pressure = space.extract(FieldRole::ElementPressure, &x).on_slab(slab);
    let facet_pressure = space.extract(FieldRole::FacetPressure, &x).on_slab(slab);
    let outgoing = velocity.element.end_trace();
    let jump = velocity.element.time_jump(incoming);

    let convection = if data.convection { Some(assemble_o_h_slab(d, slab, &velocity.element)?) } else { None };
    system.convection = convection;
    let k = system.operator();
    let r = system.constrained_rhs();
    let kx = k.matvec(&x);
    let res = kx.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = kx.iter().chain(&r).fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = relative(res, scale);

    let bt_u = system.coupling.matvec_transpose(&x);
    let divergence_residual = bt_u.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let (_, trace_rhs) = assemble_time_terms(d, slab, incoming, None)?;
    let forcing: f64 = x.iter().zip(system.rhs.iter().zip(&trace_rhs)).map(|(xi, (r, t))| xi * (r - t)).sum();
    let energy = SlabEnergy {
        incoming_sq: l2_norm(d, incoming).powi(2),
        outgoing_sq: l2_norm(d, &outgoing).powi(2),
        jump_sq: l2_norm(d, &jump).powi(2),
        viscous: data.nu * system.viscous.bilinear(&x, &x),
        convective: system.convection.as_ref().map_or(0.0, |o| o.bilinear(&x, &x)),
        forcing,
    };

    let mut conf = Conformity::default();
    let mut max_sampled_l2 = 0.0f64;
    let snap = d.snapshot();
    for s in sample_times(d) {
        let u = velocity.element.at_reference_time(s);
        conf = conf.merge(&conformity(&snap, &u));
        max_sampled_l2 = max_sampled_l2.max(l2_norm(&snap, &u));
    }

    Ok(SlabState {
        slab,
        solution: x,
        velocity,
        pressure,
        facet_pressure,
        incoming: incoming.clone(),
        outgoing,
        iterations: increments.len(),
        converged,
        increments,
        residual,
        divergence_residual,
        energy,
        conformity: conf,
        max_sampled_l2,
    })
}

/// One row of the energy ledger: the slab terms and the cumulative balance
/// `|u_{m+1}^-|^2 + sum_n (|[u]_n|^2 + 2 int (nu a_h + o_h)) = |u_0^-|^2 + 2 sum_n int (f, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub slab: usize,
    pub start: f64,
    pub end: f64,
    pub energy: SlabEnergy,
    pub slab_residual: f64,
    pub cumulative_lhs: f64,
    pub cumulative_rhs: f64,
    pub cumulative_residual: f64,
}

/// Outcome of a time-marching run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Picard iteration did not converge on this slab; later slabs were not
    /// computed.
    NotConverged { slab: usize },
}

/// States of all computed slabs and the derived ledgers.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub initial: DiscreteField,
    pub states: Vec<SlabState>,
    pub ledger: Vec<EnergyRow>,
    pub status: RunStatus,
}

impl SimulationResult {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Conformity over all slabs.
    pub fn conformity(&self) -> Conformity {
        self.states.iter().fold(Conformity::default(), |c, s| c.merge(&s.conformity))
    }

    pub fn max_sampled_l2(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s.max_sampled_l2))
    }

    /// `max_m |u_{m+1}^-| + max_m |[u]_m|`.
    pub fn linf_bound(&self) -> f64 {
        let out = self.states.iter().fold(0.0f64, |m, s| m.max(s.energy.outgoing_sq.sqrt()));
        let jump = self.states.iter().fold(0.0f64, |m, s| m.max(s.energy.jump_sq.sqrt()));
        out + jump
    }

    pub fn total_iterations(&self) -> usize {
        self.states.iter().map(|s| s.iterations).sum()
    }
}

fn ledger(initial_sq: f64, states: &[SlabState]) -> Vec<EnergyRow> {
    let mut dissipated = 0.0;
    let mut dissipated_abs = 0.0;
    let mut forced = 0.0;
    let mut forced_abs = 0.0;
    states
        .iter()
        .map(|s| {
            let e = s.energy;
            dissipated += e.jump_sq + 2.0 * (e.viscous + e.convective);
            dissipated_abs += e.jump_sq + 2.0 * (e.viscous.abs() + e.convective.abs());
            forced += 2.0 * e.forcing;
            forced_abs += 2.0 * e.forcing.abs();
            let lhs = e.outgoing_sq + dissipated;
            let rhs = initial_sq + forced;
            let scale = e.outgoing_sq + dissipated_abs + initial_sq + forced_abs;
            EnergyRow {
                slab: s.slab.index,
                start: s.slab.start,
                end: s.slab.end,
                energy: e,
                slab_residual: e.relative_residual(),
                cumulative_lhs: lhs,
                cumulative_rhs: rhs,
                cumulative_residual: relative(lhs - rhs, scale),
            }
        })
        .collect()
}

/// Marches over all slabs of `layout`, handing the end trace of each slab
/// to the next. Stops at the first slab whose Picard iteration does not
/// converge and keeps the states computed so far.
pub fn run_simulation(
    d: &Discretization,
    layout: &SpaceTimeLayout,
    data: &ProblemData,
    config: &SolverConfig,
) -> Result<SimulationResult> {
    data.validate()?;
    config.validate()?;
    if (layout.final_time() - data.final_time).abs() > 1e-12 * data.final_time {
        return Err(HdgError::InvalidArgument(format!(
            "time partition ends at {}, the problem at {}",
            layout.final_time(),
            data.final_time
        )));
    }
    let initial = initial_trace(d, data)?;
    let initial_sq = l2_norm(d, &initial).powi(2);
    let mut states: Vec<SlabState> = Vec::with_capacity(layout.n_slabs());
    let mut status = RunStatus::Completed;
    let mut incoming = initial.clone();
    for slab in layout.slabs() {
        let state = picard_solve_slab(d, slab, &incoming, data, config)?;
        incoming = state.outgoing.clone();
        let ok = state.converged;
        states.push(state);
        if !ok {
            status = RunStatus::NotConverged { slab: slab.index };
            break;
        }
    }
    let ledger = ledger(initial_sq, &states);
    Ok(SimulationResult { initial, states, ledger, status })
}

/// Assembled slab system for inspection, identical to the one built by
/// [`picard_solve_slab`] before the first solve.
pub fn slab_system(
    d: &Discretization,
    slab: Slab,
    incoming: &DiscreteField,
    data: &ProblemData,
    config: &SolverConfig,
) -> Result<SlabSystem> {
    SlabSystem::assemble(d, slab, config.penalty(d.spatial_degree()), data.nu, incoming, data.body_force())
}

/// Solves the linear slab system for a fixed convection field `w` (or
/// without convection), directly or by static condensation.
pub fn solve_linear_slab(system: &SlabSystem, condensed: bool) -> Result<Vec<f64>> {
    solve(system, condensed)
}

/// `max |x - y| / max |y|`.
pub fn coefficient_difference(x: &[f64], y: &[f64]) -> f64 {
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    relative(diff, scale)
}

/// Convenience: the solution matrix of the slab system as assembled.
pub fn slab_operator(system: &SlabSystem) -> CsrMatrix {
    system.operator()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize, ks: usize, kt: usize) -> Discretization {
        Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap(), ks, kt).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_state_at_once() {
        let d = setup(2, 1, 1);
        let data = zero_problem(0.1, 1.0);
        let layout = SpaceTimeLayout::uniform(1.0, 2).unwrap();
        let run = run_simulation(&d, &layout, &data, &SolverConfig::default()).unwrap();
        assert!(run.completed());
        for s in &run.states {
            assert!(s.iterations <= 2);
            assert!(s.solution.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn initial_trace_is_solenoidal() {
        let d = setup(2, 2, 0);
        let data = taylor_green(0.1, 1.0);
        let u0 = initial_trace(&d, &data).unwrap();
        let c = conformity(&d, &u0);
        assert!(c.max() < 1e-10, "{c:?}");
    }

    #[test]
    fn initial_trace_is_l2_stable() {
        let d = setup(4, 1, 0);
        let data = taylor_green(0.1, 1.0);
        let u0 = initial_trace(&d, &data).unwrap();
        // ||U||^2 = 2 * (3/8) * (1/2) on the unit square.
        let exact = (2.0 * 0.375 * 0.5f64).sqrt();
        assert!(l2_norm(&d, &u0) <= exact);
    }

    #[test]
    fn stokes_mode_is_one_direct_solve() {
        let d = setup(2, 1, 1);
        let data = stokes_steady(1.0, 0.5);
        let slab = SpaceTimeLayout::uniform(0.5, 1).unwrap().slab(0);
        let u0 = initial_trace(&d, &data).unwrap();
        let cfg = SolverConfig::default();
        let state = picard_solve_slab(&d, slab, &u0, &data, &cfg).unwrap();
        let direct = solve_linear_slab(&slab_system(&d, slab, &u0, &data, &cfg).unwrap(), false).unwrap();
        assert_eq!(state.iterations, 1);
        assert_eq!(state.solution, direct);
    }

    #[test]
    fn condensed_solve_matches_direct_solve() {
        let d = setup(2, 2, 1);
        let data = taylor_green(0.05, 0.5);
        let slab = SpaceTimeLayout::uniform(0.5, 2).unwrap().slab(0);
        let u0 = initial_trace(&d, &data).unwrap();
        let cfg = SolverConfig::default();
        let mut sys = slab_system(&d, slab, &u0, &data, &cfg).unwrap();
        sys.set_convection(&d, Some(&u0.extend_in_time(2).on_slab(slab))).unwrap();
        let a = solve_linear_slab(&sys, false).unwrap();
        let b = solve_linear_slab(&sys, true).unwrap();
        assert!(coefficient_difference(&b, &a) < 1e-10);
    }

    #[test]
    fn energy_identity_holds_per_slab() {
        let d = setup(2, 2, 1);
        let data = taylor_green(0.05, 0.5);
        let layout = SpaceTimeLayout::uniform(0.5, 2).unwrap();
        let run = run_simulation(&d, &layout, &data, &SolverConfig::default()).unwrap();
        assert!(run.completed());
        for row in &run.ledger {
            assert!(row.slab_residual < 1e-8, "{row:?}");
            assert!(row.cumulative_residual < 1e-8, "{row:?}");
            assert!(row.energy.convective >= -1e-12);
        }
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let cfg = SolverConfig { tolerance: 0.0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig { max_iterations: 0, ..SolverConfig::default() };
        assert!(cfg.validate().is_err());
        let data = ProblemData { nu: -1.0, ..zero_problem(1.0, 1.0) };
        assert!(data.validate().is_err());
    }
}
