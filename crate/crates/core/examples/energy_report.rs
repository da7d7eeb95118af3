//! Discrete energy balance of an unforced run: the per-slab ledger, the
//! energy-inequality slacks with their decomposition, and the time-shift
//! equicontinuity probe.
//!
//! `cargo run --release --example energy_report -- [n] [slabs] [ks] [kt]`

use sthdg::solver::{run_simulation, taylor_green, SolverConfig};
use sthdg::verify::{energy_inequality_report, equicontinuity_probe};
use sthdg::{Rectangle, SpaceTimeLayout, SpatialMesh};

fn main() -> sthdg::Result<()> {
    let arg = |i: usize, d: usize| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (n, slabs, ks, kt) = (arg(1, 4), arg(2, 8), arg(3, 2), arg(4, 1));
    let data = taylor_green(0.01, 1.0).unforced();
    let config = SolverConfig::default();
    let d = config.discretization(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, ks, kt)?;
    let layout = SpaceTimeLayout::uniform(data.final_time, slabs)?;
    let run = run_simulation(&d, &layout, &data, &config)?;
    let report = energy_inequality_report(&d, &run, &data)?;
    print!("{}", report.to_csv()?);
    println!("cumulative ledger residual: {:.2e}", run.ledger.iter().map(|r| r.cumulative_residual.abs()).fold(0.0, f64::max));
    println!("smallest relative slack: {:.3e}", report.min_relative_slack());
    println!("slack decomposition residual: {:.2e}", report.decomposition_residual());
    println!("norms non-increasing: {}", report.level_norms_non_increasing(0.0));
    for p in equicontinuity_probe(&d, &run) {
        println!("shift {:.4}: int |u(t) - u(t - shift)|^2 = {:.6e}", p.delta, p.value);
    }
    Ok(())
}
