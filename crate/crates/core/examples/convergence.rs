//! Joint space-time refinement on the Taylor–Green benchmark: L2(L2) and
//! energy errors, Cauchy increments between levels and fitted orders.
//!
//! `cargo run --release --example convergence -- [ks] [kt] [levels]`

use sthdg::solver::{taylor_green, SolverConfig};
use sthdg::verify::{convergence_study, ConvergenceStudy};

fn main() -> sthdg::Result<()> {
    let arg = |i: usize, d: usize| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let study = ConvergenceStudy {
        data: taylor_green(0.01, 1.0),
        config: SolverConfig::default(),
        ks: arg(1, 1),
        kt: arg(2, 0),
        base_n: 2,
        base_slabs: 1,
        levels: arg(3, 3),
    };
    let report = convergence_study(&study)?;
    print!("{}", report.to_csv()?);
    for name in ["l2l2_error", "cauchy_increment"] {
        println!("{name} strictly decreasing: {}", report.strictly_decreasing(name));
    }
    Ok(())
}
