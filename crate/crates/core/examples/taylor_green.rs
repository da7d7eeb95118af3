//! Forced Taylor–Green run: energy ledger, Picard counts and conformity.
//!
//! `cargo run --release --example taylor_green -- [n] [slabs] [ks] [kt] [condensed]`

use std::time::Instant;

use sthdg::solver::{run_simulation, taylor_green, SolverConfig};
use sthdg::{Rectangle, SpaceTimeLayout, SpatialMesh};

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> sthdg::Result<()> {
    let (n, slabs, ks, kt) = (arg(1, 8), arg(2, 8), arg(3, 2), arg(4, 1));
    let data = taylor_green(0.01, 1.0);
    let condensed = std::env::args().nth(5).as_deref() == Some("condensed");
    let config = SolverConfig { static_condensation: condensed, ..SolverConfig::default() };
    let d = config.discretization(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, ks, kt)?;
    let layout = SpaceTimeLayout::uniform(data.final_time, slabs)?;
    let start = Instant::now();
    let run = run_simulation(&d, &layout, &data, &config)?;
    println!("slab  t_end    |u-|^2        |[u]|^2       visc          conv          forcing       iters  residual");
    for (row, s) in run.ledger.iter().zip(&run.states) {
        let e = row.energy;
        println!(
            "{:4}  {:.4}  {:.6e}  {:.6e}  {:.6e}  {:.6e}  {:.6e}  {:5}  {:.2e}",
            row.slab, row.end, e.outgoing_sq, e.jump_sq, e.viscous, e.convective, e.forcing, s.iterations, row.cumulative_residual
        );
    }
    let c = run.conformity();
    println!(
        "conformity: div {:.2e}, normal jump {:.2e}, boundary normal {:.2e} (max |u| {:.3e})",
        c.divergence,
        c.normal_jump,
        c.boundary_normal,
        run.max_sampled_l2()
    );
    println!("status {:?}, {} Picard iterations, {:.1?}", run.status, run.total_iterations(), start.elapsed());
    Ok(())
}
