//! With piecewise-constant time the slab scheme is implicit Euler. The oracle
//! below assembles the Euler saddle-point system directly from the spatial
//! forms, runs its own Picard loop and is compared coefficient-wise with the
//! slab solver.

use sthdg::forms::{assemble_a_h, assemble_b_h, assemble_mass, assemble_mean_constraint, assemble_o_h};
use sthdg::linalg::{solve_sparse, CsrMatrix, Entry};
use sthdg::solver::{coefficient_difference, run_simulation, taylor_green, SolverConfig};
use sthdg::spaces::FieldRole;
use sthdg::{DiscreteField, Discretization, Rectangle, SpaceTimeLayout, SpatialMesh};

fn constrain_boundary(d: &Discretization, k: &CsrMatrix, r: &mut [f64]) -> CsrMatrix {
    let fixed = d.space().constrained_mask();
    let n = k.n_rows();
    let mut entries: Vec<Entry> = k.entries().filter(|&(i, j, _)| !fixed[i] && !fixed[j]).collect();
    for i in (0..n).filter(|&i| fixed[i]) {
        entries.push((i, i, 1.0));
        r[i] = 0.0;
    }
    CsrMatrix::from_entries(n, n, entries)
}

/// One implicit Euler step from `u_prev` (element velocity snapshot).
fn euler_step(d: &Discretization, u_prev: &DiscreteField, nu: f64, dt: f64, convection: bool) -> Vec<f64> {
    let mass = assemble_mass(d);
    let stokes = mass
        .add_scaled(&assemble_a_h(d, 32.0).unwrap(), dt * nu)
        .add_scaled(&assemble_b_h(d), dt)
        .add_scaled(&assemble_b_h(d).transpose(), -dt)
        .add_scaled(&assemble_mean_constraint(d), 1.0)
        .add_scaled(&assemble_mean_constraint(d).transpose(), 1.0);
    let space = d.space();
    let mut prev = vec![0.0; space.n_dofs()];
    for k in 0..d.n_elements() {
        for c in 0..2 {
            for i in 0..space.n_velocity_basis() {
                prev[space.u(k, c, i, 0)] = u_prev.coefficient(k, c, i, 0);
            }
        }
    }
    let rhs0 = mass.matvec(&prev);
    let mut w = u_prev.clone();
    let mut x = vec![0.0; space.n_dofs()];
    for _ in 0..100 {
        let op = if convection { stokes.add_scaled(&assemble_o_h(d, &w).unwrap(), dt) } else { stokes.clone() };
        let mut rhs = rhs0.clone();
        let k = constrain_boundary(d, &op, &mut rhs);
        let next = solve_sparse(&k, &rhs).unwrap();
        let change = coefficient_difference(&next, &x);
        x = next;
        w = space.extract(FieldRole::ElementVelocity, &x);
        if !convection || change < 1e-14 {
            break;
        }
    }
    x
}

fn compare(convection: bool) {
    let ks = 2;
    let slabs = 4;
    let mut data = taylor_green(0.05, 0.4).unforced();
    data.convection = convection;
    let config = SolverConfig { tolerance: 1e-13, alpha: Some(32.0), ..SolverConfig::default() };
    let d = config.discretization(SpatialMesh::build_uniform(4, Rectangle::unit_square()).unwrap(), ks, 0).unwrap();
    let layout = SpaceTimeLayout::uniform(data.final_time, slabs).unwrap();
    let run = run_simulation(&d, &layout, &data, &config).unwrap();
    assert!(run.completed());

    let mut u = run.initial.clone();
    for state in &run.states {
        let x = euler_step(&d, &u, data.nu, state.slab.dt(), convection);
        let diff = coefficient_difference(&state.solution, &x);
        assert!(diff < 1e-9, "slab {}: relative difference {diff:e}", state.slab.index);
        u = d.space().extract(FieldRole::ElementVelocity, &x);
    }
}

#[test]
fn stokes_matches_implicit_euler() {
    compare(false);
}

#[test]
fn navier_stokes_matches_implicit_euler() {
    compare(true);
}
