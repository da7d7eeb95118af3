//! Operator identities on seeded random fields: rewritten viscous and
//! convective forms, upwind dissipation, lifting and discrete-gradient
//! definitions and the time lifting.
//!
//! `cargo run --release --example identities -- [seed] [samples]`

use sthdg::verify::{identity_suite_grid, IdentityCheck};

fn main() -> sthdg::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let samples: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let report = identity_suite_grid(&[2, 4], &[1, 2], &[0, 1], seed, samples)?;
    println!("check                 samples  max residual");
    for check in [
        IdentityCheck::Viscous,
        IdentityCheck::Convection,
        IdentityCheck::Dissipation,
        IdentityCheck::Lifting,
        IdentityCheck::DiscreteGradient,
        IdentityCheck::TimeLifting,
        IdentityCheck::TimeLiftingLowest,
    ] {
        println!("{:<21} {:>7}  {:.3e}", check.name(), report.samples(check), report.max_residual(check));
    }
    println!("smallest upwind dissipation: {:.3e}", report.min_dissipation());
    Ok(())
}
