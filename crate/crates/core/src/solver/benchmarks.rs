//! Manufactured benchmark problems on the unit square.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{ExactSolution, ProblemData};
use crate::error::HdgError;
use crate::mesh::{Point, Rectangle};

/// Built-in problem identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    /// Forced Navier–Stokes flow `u = U(x) e^{-t}`, `p = cos(pi x) cos(pi y) e^{-t}`.
    TaylorGreen,
    /// Stokes flow with the steady solution `u = U(x)`, `p = cos(pi x) cos(pi y)`.
    StokesSteady,
    /// Homogeneous data, `u = 0`.
    Zero,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::TaylorGreen, Benchmark::StokesSteady, Benchmark::Zero];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::TaylorGreen => "taylor-green",
            Benchmark::StokesSteady => "stokes-steady",
            Benchmark::Zero => "zero",
        }
    }

    pub fn problem(self, nu: f64, final_time: f64) -> ProblemData {
        match self {
            Benchmark::TaylorGreen => taylor_green(nu, final_time),
            Benchmark::StokesSteady => stokes_steady(nu, final_time),
            Benchmark::Zero => zero_problem(nu, final_time),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = HdgError;

    fn from_str(s: &str) -> Result<Self, HdgError> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| HdgError::Configuration(format!("unknown benchmark '{s}'")))
    }
}

/// Solenoidal profile `U = (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y))`,
/// vanishing on the boundary of the unit square.
pub fn profile(x: Point) -> [f64; 2] {
    let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
    [sx * sx * (2.0 * PI * x[1]).sin(), -(2.0 * PI * x[0]).sin() * sy * sy]
}

/// `grad U`, `[c][d] = d_d U_c`.
pub fn profile_gradient(x: Point) -> [[f64; 2]; 2] {
    let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
    let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
    let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
    [[PI * s2x * s2y, 2.0 * PI * sx * sx * c2y], [-2.0 * PI * c2x * sy * sy, -PI * s2x * s2y]]
}

/// `Delta U`.
pub fn profile_laplacian(x: Point) -> [f64; 2] {
    let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
    let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
    let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
    let pi2 = PI * PI;
    [
        2.0 * pi2 * c2x * s2y - 4.0 * pi2 * sx * sx * s2y,
        4.0 * pi2 * s2x * sy * sy - 2.0 * pi2 * s2x * c2y,
    ]
}

fn pressure_profile(x: Point) -> f64 {
    (PI * x[0]).cos() * (PI * x[1]).cos()
}

fn pressure_gradient(x: Point) -> [f64; 2] {
    [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()]
}

/// `f = g' U - nu g Delta U + g^2 (U . grad) U + g grad P` with `g = e^{-t}`.
pub fn taylor_green(nu: f64, final_time: f64) -> ProblemData {
    let force = move |x: Point, t: f64| {
        let g = (-t).exp();
        let u = profile(x);
        let gu = profile_gradient(x);
        let lap = profile_laplacian(x);
        let gp = pressure_gradient(x);
        let mut f = [0.0; 2];
        for c in 0..2 {
            let conv = u[0] * gu[c][0] + u[1] * gu[c][1];
            f[c] = -g * u[c] - nu * g * lap[c] + g * g * conv + g * gp[c];
        }
        f
    };
    ProblemData {
        name: Benchmark::TaylorGreen.name().into(),
        nu,
        final_time,
        domain: Rectangle::unit_square(),
        convection: true,
        force: Some(Arc::new(force)),
        initial: Arc::new(profile),
        exact: Some(ExactSolution {
            velocity: Arc::new(|x, t| {
                let u = profile(x);
                let g = (-t).exp();
                [g * u[0], g * u[1]]
            }),
            gradient: Arc::new(|x, t| {
                let gu = profile_gradient(x);
                let g = (-t).exp();
                [[g * gu[0][0], g * gu[0][1]], [g * gu[1][0], g * gu[1][1]]]
            }),
            pressure: Arc::new(|x, t| (-t).exp() * pressure_profile(x)),
        }),
    }
}

/// Steady Stokes flow: `f = -nu Delta U + grad P`, convection disabled.
pub fn stokes_steady(nu: f64, final_time: f64) -> ProblemData {
    let force = move |x: Point, _t: f64| {
        let lap = profile_laplacian(x);
        let gp = pressure_gradient(x);
        [-nu * lap[0] + gp[0], -nu * lap[1] + gp[1]]
    };
    ProblemData {
        name: Benchmark::StokesSteady.name().into(),
        nu,
        final_time,
        domain: Rectangle::unit_square(),
        convection: false,
        force: Some(Arc::new(force)),
        initial: Arc::new(profile),
        exact: Some(ExactSolution {
            velocity: Arc::new(|x, _| profile(x)),
            gradient: Arc::new(|x, _| profile_gradient(x)),
            pressure: Arc::new(|x, _| pressure_profile(x)),
        }),
    }
}

/// `f = 0`, `u_0 = 0`.
pub fn zero_problem(nu: f64, final_time: f64) -> ProblemData {
    ProblemData {
        name: Benchmark::Zero.name().into(),
        nu,
        final_time,
        domain: Rectangle::unit_square(),
        convection: true,
        force: None,
        initial: Arc::new(|_| [0.0, 0.0]),
        exact: Some(ExactSolution {
            velocity: Arc::new(|_, _| [0.0, 0.0]),
            gradient: Arc::new(|_, _| [[0.0; 2]; 2]),
            pressure: Arc::new(|_, _| 0.0),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 1e-5;

    fn fd_gradient(f: impl Fn(Point) -> [f64; 2], x: Point) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += H;
            xm[d] -= H;
            let (fp, fm) = (f(xp), f(xm));
            for c in 0..2 {
                g[c][d] = (fp[c] - fm[c]) / (2.0 * H);
            }
        }
        g
    }

    const SAMPLES: [Point; 4] = [[0.13, 0.71], [0.5, 0.5], [0.82, 0.27], [0.33, 0.05]];

    #[test]
    fn profile_is_solenoidal_and_vanishes_on_boundary() {
        for x in SAMPLES {
            let g = profile_gradient(x);
            assert!((g[0][0] + g[1][1]).abs() < 1e-14);
        }
        for s in [0.0, 0.3, 0.77, 1.0] {
            for x in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                let u = profile(x);
                assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for x in SAMPLES {
            let g = profile_gradient(x);
            let fd = fd_gradient(profile, x);
            for c in 0..2 {
                for d in 0..2 {
                    assert!((g[c][d] - fd[c][d]).abs() < 1e-7);
                }
            }
            let lap = profile_laplacian(x);
            for c in 0..2 {
                let mut l = 0.0;
                for d in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += 1e-4;
                    xm[d] -= 1e-4;
                    l += (profile(xp)[c] - 2.0 * profile(x)[c] + profile(xm)[c]) / 1e-8;
                }
                assert!((lap[c] - l).abs() < 1e-4, "{} vs {}", lap[c], l);
            }
        }
    }

    /// The forcing equals the residual of the momentum equation evaluated
    /// with finite differences of the exact fields.
    #[test]
    fn forcing_matches_momentum_residual() {
        let nu = 0.03;
        let data = taylor_green(nu, 1.0);
        let exact = data.exact.as_ref().unwrap();
        let f = data.force.as_ref().unwrap();
        for x in SAMPLES {
            for t in [0.0, 0.4] {
                let u = (exact.velocity)(x, t);
                let dt: Vec<f64> = (0..2)
                    .map(|c| ((exact.velocity)(x, t + H)[c] - (exact.velocity)(x, t - H)[c]) / (2.0 * H))
                    .collect();
                let gu = fd_gradient(|y| (exact.velocity)(y, t), x);
                let mut gp = [0.0; 2];
                for d in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += H;
                    xm[d] -= H;
                    gp[d] = ((exact.pressure)(xp, t) - (exact.pressure)(xm, t)) / (2.0 * H);
                }
                let lap = profile_laplacian(x);
                let g = (-t).exp();
                let fv = f(x, t);
                for c in 0..2 {
                    let r = dt[c] - nu * g * lap[c] + u[0] * gu[c][0] + u[1] * gu[c][1] + gp[c];
                    assert!((r - fv[c]).abs() < 1e-6, "{r} vs {}", fv[c]);
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for b in Benchmark::ALL {
            assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        }
        assert!("vortex".parse::<Benchmark>().is_err());
    }
}
