//! Energy-inequality slacks of a completed run.

use super::{fmt, write_csv};
use crate::error::Result;
use crate::liftings::SpatialLifting;
use crate::solver::{ProblemData, SimulationResult};
use crate::spaces::{l2_norm, slab_integral, Discretization};

/// Slack of the energy inequality at `t_{m+1}`:
/// `|u_0^-|^2 + 2 int_0^t (f, u) - |u(t^-)|^2 - 2 nu sum_i int_0^t |G(u_i)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySlack {
    pub slab: usize,
    pub time: f64,
    pub slack: f64,
    /// Sum of the magnitudes of the terms in the slack.
    pub scale: f64,
    /// `sum |[u]|^2 + 2 int o_h`, from the ledger.
    pub jumps_and_convection: f64,
    /// `2 nu int (a_h(u, u) - sum_i |G(u_i)|^2)`.
    pub penalty_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub slacks: Vec<EnergySlack>,
    /// `|u_{m+1}^-|`, one per slab.
    pub level_norms: Vec<f64>,
}

impl EnergyReport {
    /// Smallest `slack / scale`.
    pub fn min_relative_slack(&self) -> f64 {
        self.slacks
            .iter()
            .map(|s| if s.scale > 0.0 { s.slack / s.scale } else { s.slack })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn level_norms_non_increasing(&self, tol: f64) -> bool {
        self.level_norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol))
    }

    /// Largest mismatch between the slack and its ledger decomposition,
    /// relative to the slack scale.
    pub fn decomposition_residual(&self) -> f64 {
        self.slacks
            .iter()
            .map(|s| {
                let d = (s.slack - s.jumps_and_convection - s.penalty_excess).abs();
                if s.scale > 0.0 {
                    d / s.scale
                } else {
                    d
                }
            })
            .fold(0.0, f64::max)
    }

    /// Header `slab,time,slack,scale,jumps_and_convection,penalty_excess,level_norm`.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .slacks
            .iter()
            .zip(&self.level_norms)
            .map(|(s, n)| {
                vec![
                    s.slab.to_string(),
                    fmt(s.time),
                    fmt(s.slack),
                    fmt(s.scale),
                    fmt(s.jumps_and_convection),
                    fmt(s.penalty_excess),
                    fmt(*n),
                ]
            })
            .collect();
        write_csv(&["slab", "time", "slack", "scale", "jumps_and_convection", "penalty_excess", "level_norm"], &rows)
    }
}

/// Slacks at every computed time level of `run`.
pub fn energy_inequality_report(d: &Discretization, run: &SimulationResult, data: &ProblemData) -> Result<EnergyReport> {
    let snap = d.snapshot();
    let lift = SpatialLifting::new(d, d.spatial_degree())?;
    let initial_sq = l2_norm(&snap, &run.initial).powi(2);
    let mut forced = 0.0;
    let mut forced_abs = 0.0;
    let mut gradient = 0.0;
    let mut ledger_part = 0.0;
    let mut excess = 0.0;
    let mut slacks = Vec::with_capacity(run.states.len());
    let mut level_norms = Vec::with_capacity(run.states.len());
    for state in &run.states {
        let e = state.energy;
        let g = slab_integral(d, state.slab.dt(), &state.velocity, |p, s| p.at_reference_time(s), |p| {
            lift.discrete_gradient(&snap, p).map(|g| g.l2_norm_sq(&snap)).unwrap_or(f64::NAN)
        });
        forced += 2.0 * e.forcing;
        forced_abs += 2.0 * e.forcing.abs();
        gradient += 2.0 * data.nu * g;
        ledger_part += e.jump_sq + 2.0 * e.convective;
        excess += 2.0 * (e.viscous - data.nu * g);
        let slack = initial_sq + forced - e.outgoing_sq - gradient;
        slacks.push(EnergySlack {
            slab: state.slab.index,
            time: state.slab.end,
            slack,
            scale: initial_sq + forced_abs + e.outgoing_sq + gradient,
            jumps_and_convection: ledger_part,
            penalty_excess: excess,
        });
        level_norms.push(e.outgoing_sq.sqrt());
    }
    Ok(EnergyReport { slacks, level_norms })
}
