//! Steady Stokes benchmark without convection: one linear solve per slab and
//! errors against the exact velocity, plus a custom initial condition built
//! from solenoidal bumps.
//!
//! `cargo run --release --example stokes -- [n] [ks]`

use sthdg::cli::bump_problem;
use sthdg::projections::CurlBump;
use sthdg::solver::{run_simulation, stokes_steady, SolverConfig};
use sthdg::spaces::l2_norm;
use sthdg::verify::convergence_metrics;
use sthdg::verify::LevelRun;
use sthdg::{Rectangle, SpaceTimeLayout, SpatialMesh};

fn main() -> sthdg::Result<()> {
    let arg = |i: usize, d: usize| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (n, ks) = (arg(1, 4), arg(2, 2));
    let config = SolverConfig::default();

    let data = stokes_steady(1.0, 0.5);
    let mut levels = Vec::new();
    for l in 0..3 {
        let nl = n << l;
        let d = config.discretization(SpatialMesh::build_uniform(nl, Rectangle::unit_square())?, ks, 0)?;
        let layout = SpaceTimeLayout::uniform(data.final_time, 2 << l)?;
        let run = run_simulation(&d, &layout, &data, &config)?;
        println!("n = {nl}: {} linear solves for {} slabs", run.total_iterations(), run.states.len());
        levels.push(LevelRun { n: nl, slabs: 2 << l, discretization: d, layout, run });
    }
    print!("{}", convergence_metrics(&data, &levels)?.to_csv()?);

    let bumps = vec![CurlBump::new([0.35, 0.5], 0.25, 1.0), CurlBump::new([0.65, 0.5], 0.25, -1.0)];
    let flow = bump_problem(bumps, 0.01, 0.5);
    let d = config.discretization(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, ks, 1)?;
    let run = run_simulation(&d, &SpaceTimeLayout::uniform(0.5, 4)?, &flow, &config)?;
    println!("\ncounter-rotating bumps: |u_0| = {:.6e}", l2_norm(&d, &run.initial));
    for r in &run.ledger {
        println!("t = {:.3}: |u-| = {:.6e}", r.end, r.energy.outgoing_sq.sqrt());
    }
    Ok(())
}
