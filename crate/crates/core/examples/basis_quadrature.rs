//! Reference bases and quadrature: dimensions, orthonormality of the
//! simplex basis and exactness of the triangle rules.
//!
//! `cargo run --example basis_quadrature -- [max_degree]`

use sthdg::basis::{quadrature, simplex_dim, LegendreBasis, QuadratureDomain, SimplexBasis};

fn main() -> sthdg::Result<()> {
    let kmax: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    println!("k  dim  points  mass_defect  legendre_defect");
    for k in 0..=kmax {
        let basis = SimplexBasis::new(k)?;
        let rule = quadrature(QuadratureDomain::Triangle, 2 * k)?;
        let n = simplex_dim(k);
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let m = rule.integrate(|p| {
                    let v = basis.values(p);
                    v[i] * v[j]
                });
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((m - target).abs());
            }
        }
        let lb = LegendreBasis::new(k);
        let line = quadrature(QuadratureDomain::Interval, 2 * k)?;
        let mut ldefect = 0.0f64;
        for i in 0..=k {
            for j in 0..=k {
                let m = line.integrate(|p| {
                    let v = lb.values(p[0]);
                    v[i] * v[j]
                });
                let target = if i == j { lb.norm_squared(i) } else { 0.0 };
                ldefect = ldefect.max((m - target).abs());
            }
        }
        println!("{k}  {n:3}  {:6}  {defect:.2e}     {ldefect:.2e}", rule.len());
    }
    let rule = quadrature(QuadratureDomain::Triangle, 10)?;
    // a! b! / (a + b + 2)! with a = b = 5.
    let exact = 120.0 * 120.0 / (1..=12).map(f64::from).product::<f64>();
    let approx = rule.integrate(|p| p[0].powi(5) * p[1].powi(5));
    println!("int x^5 y^5 over the reference triangle: {approx:.15e} (closed form {exact:.15e})");
    Ok(())
}
