//! Static condensation against the direct sparse solve on the first slab of
//! a Taylor–Green run: coefficient agreement and timing.
//!
//! `cargo run --release --example static_condensation -- [n] [ks] [kt]`

use std::time::Instant;

use sthdg::solver::{coefficient_difference, initial_trace, picard_solve_slab, taylor_green, SolverConfig};
use sthdg::{Rectangle, SpaceTimeLayout, SpatialMesh};

fn main() -> sthdg::Result<()> {
    let arg = |i: usize, d: usize| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (n, ks, kt) = (arg(1, 8), arg(2, 2), arg(3, 1));
    let data = taylor_green(0.01, 1.0);
    let direct = SolverConfig::default();
    let condensed = SolverConfig { static_condensation: true, ..SolverConfig::default() };
    let d = direct.discretization(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, ks, kt)?;
    let slab = SpaceTimeLayout::uniform(data.final_time, 8)?.slab(0);
    let incoming = initial_trace(&d, &data)?;
    println!("unknowns per slab: {}", d.space().n_dofs());

    let t = Instant::now();
    let a = picard_solve_slab(&d, slab, &incoming, &data, &direct)?;
    println!("direct:    {} Picard iterations, {:.2?}", a.iterations, t.elapsed());
    let t = Instant::now();
    let b = picard_solve_slab(&d, slab, &incoming, &data, &condensed)?;
    println!("condensed: {} Picard iterations, {:.2?}", b.iterations, t.elapsed());
    println!("max relative coefficient difference: {:.2e}", coefficient_difference(&b.solution, &a.solution));
    Ok(())
}
