//! Approximation orders of the temporal L2 projection and of the
//! divergence-free projection in L2, H1 and the maximum norm.
//!
//! `cargo run --release --example projection_rates -- [ks] [kt] [levels]`

use sthdg::verify::{projection_rates, ProjectionStudy};

fn main() -> sthdg::Result<()> {
    let arg = |i: usize, d: usize| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (ks, kt) = (arg(1, 2), arg(2, 1));
    let report = projection_rates(&ProjectionStudy { ks, kt, base_n: 4, levels: arg(3, 4) })?;
    print!("{}", report.to_csv()?);
    println!("expected orders: time {}, L2 {}, H1 {}, max norm at least 0.5", kt + 1, ks + 1, ks);
    Ok(())
}
