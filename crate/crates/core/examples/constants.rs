//! Spectral estimates of the discrete Poincaré, lifting, coercivity,
//! boundedness, norm-equivalence, convection and time-derivative constants on
//! refined meshes, with a too-small penalty as negative control.
//!
//! `cargo run --release --example constants -- [ks] [kt] [alpha]`

use sthdg::solver::taylor_green;
use sthdg::verify::{constant_estimates, ConstantStudy};

fn main() -> sthdg::Result<()> {
    let ks: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let kt: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let alpha: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(8.0 * (ks * ks) as f64);
    let mut study = ConstantStudy::new(ks, kt, alpha, 11);
    study.time_data = Some(taylor_green(0.01, 1.0));
    let report = constant_estimates(&study)?;
    print!("{}", report.to_csv()?);
    println!("coercive: {}, all constants bounded: {}", report.coercive(), report.all_bounded());

    let mut control = ConstantStudy::new(ks, kt, 0.01, 11);
    control.levels = 1;
    let control = constant_estimates(&control)?;
    println!("penalty 0.01: coercivity {:.3e} (coercive: {})", control.levels[0].coercivity, control.coercive());
    Ok(())
}
