//! Asymptotic-consistency residuals of the viscous and convective forms on
//! the Taylor–Green benchmark for a compactly supported bump test function.
//!
//! `cargo run --release --example consistency -- [cx] [cy] [radius] [ks] [kt] [levels] [base_n]`

use sthdg::projections::{CurlBump, TensorTestFunction, TestMode};
use sthdg::solver::{taylor_green, SolverConfig};
use sthdg::verify::{consistency_residuals, ConvergenceStudy};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> sthdg::Result<()> {
    let center = [arg(1, 0.4), arg(2, 0.55)];
    let radius = arg(3, 0.3);
    let study = ConvergenceStudy {
        data: taylor_green(0.01, 1.0),
        config: SolverConfig::default(),
        ks: arg(4, 1),
        kt: arg(5, 0),
        base_n: arg(7, 4),
        base_slabs: arg(7, 4) / 2,
        levels: arg(6, 4),
    };
    let levels = study.solve_levels()?;
    let mode = TestMode {
        time: Box::new(|t: f64| (std::f64::consts::PI * t).cos()),
        space: Box::new(CurlBump::new(center, radius, 1.0)),
    };
    let test = TensorTestFunction::new(vec![mode], &levels[0].discretization)?;
    let report = consistency_residuals(&study.data, &levels, &test, study.config.penalty(study.ks))?;
    print!("{}", report.to_csv()?);
    Ok(())
}
