//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use sthdg::mesh::{Rectangle, SpaceTimeLayout, SpatialMesh};
use sthdg::projections::{CurlBump, TensorTestFunction, TestMode};
use sthdg::solver::{
    coefficient_difference, picard_solve_slab, run_simulation, taylor_green, SimulationResult, SolverConfig,
};
use sthdg::spaces::{l2_norm, Discretization};
use sthdg::verify::{
    consistency_residuals, constant_estimates, convergence_metrics, energy_inequality_report, identity_suite_grid,
    projection_rates, ConstantStudy, ConvergenceStudy, IdentityCheck, ProjectionStudy,
};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn series(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() <= limit_s
}

/// Runs of the conformity benchmark shared by several criteria.
struct Benchmark {
    d: Discretization,
    layout: SpaceTimeLayout,
    config: SolverConfig,
    run: SimulationResult,
    elapsed: Duration,
}

fn benchmark() -> Benchmark {
    let config = SolverConfig::default();
    let mesh = SpatialMesh::build_uniform(8, Rectangle::unit_square()).unwrap();
    let d = config.discretization(mesh, 2, 1).unwrap();
    let layout = SpaceTimeLayout::uniform(1.0, 8).unwrap();
    let start = Instant::now();
    let run = run_simulation(&d, &layout, &taylor_green(0.01, 1.0), &config).unwrap();
    Benchmark { d, layout, config, run, elapsed: start.elapsed() }
}

fn identities() -> (Outcome, Outcome, Outcome) {
    let start = Instant::now();
    let report = identity_suite_grid(&[2, 4], &[1, 2], &[0, 1], SEED, 13).unwrap();
    let elapsed = start.elapsed();
    let visc = report.max_residual(IdentityCheck::Viscous);
    let conv = report.max_residual(IdentityCheck::Convection);
    let n = report.samples(IdentityCheck::Viscous).min(report.samples(IdentityCheck::Convection));
    let c1 = outcome(
        visc <= 1e-10 && conv <= 1e-10 && n >= 100 && within(elapsed, 60.0),
        format!("samples {n}, viscous {visc:.2e}, convection {conv:.2e}, {:.1} s", elapsed.as_secs_f64()),
    );
    let diss = report.max_residual(IdentityCheck::Dissipation);
    let min = report.min_dissipation();
    let nd = report.samples(IdentityCheck::Dissipation);
    let c2 = outcome(
        diss <= 1e-12 && min >= -1e-12 && nd >= 100 && within(elapsed, 30.0),
        format!("samples {nd}, residual {diss:.2e}, min value {min:.3e}, {:.1} s", elapsed.as_secs_f64()),
    );
    let lift = report.max_residual(IdentityCheck::Lifting);
    let grad = report.max_residual(IdentityCheck::DiscreteGradient);
    let time = report.max_residual(IdentityCheck::TimeLifting);
    let lowest = report.max_residual(IdentityCheck::TimeLiftingLowest);
    let c3 = outcome(
        lift <= 1e-11
            && grad <= 1e-11
            && time <= 1e-11
            && lowest <= 1e-13
            && report.samples(IdentityCheck::TimeLiftingLowest) > 0,
        format!("lifting {lift:.2e}, discrete gradient {grad:.2e}, time lifting {time:.2e}, k_t = 0 {lowest:.2e}"),
    );
    (c1, c2, c3)
}

fn conformity(b: &Benchmark) -> Outcome {
    let c = b.run.conformity();
    let norm = b.run.max_sampled_l2();
    let bound = 1e-9 * norm;
    outcome(
        b.run.completed() && c.max() <= bound && within(b.elapsed, 180.0),
        format!(
            "divergence {:.2e}, normal jump {:.2e}, boundary normal {:.2e}, bound {bound:.2e}, {:.1} s",
            c.divergence,
            c.normal_jump,
            c.boundary_normal,
            b.elapsed.as_secs_f64()
        ),
    )
}

fn energy(b: &Benchmark) -> Outcome {
    let slab = b.run.ledger.iter().map(|r| r.slab_residual).fold(0.0, f64::max);
    let cumulative = b.run.ledger.iter().map(|r| r.cumulative_residual.abs()).fold(0.0, f64::max);
    let data = taylor_green(0.01, 1.0).unforced();
    let unforced = run_simulation(&b.d, &b.layout, &data, &b.config).unwrap();
    let report = energy_inequality_report(&b.d, &unforced, &data).unwrap();
    let mut norms = vec![l2_norm(&b.d, &unforced.initial)];
    norms.extend(&report.level_norms);
    let monotone = unforced.completed() && norms.windows(2).all(|w| w[1] <= w[0]);
    let slack = report.min_relative_slack();
    outcome(
        slab <= 1e-8 && cumulative <= 1e-8 && monotone && slack >= -1e-8,
        format!(
            "slab residual {slab:.2e}, cumulative {cumulative:.2e}, unforced norms non-increasing {monotone}, min relative slack {slack:.3e}"
        ),
    )
}

fn projections() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (ks, kt) in [(1, 0), (2, 1)] {
        let s = projection_rates(&ProjectionStudy { ks, kt, base_n: 4, levels: 4 }).unwrap();
        let time = s.order("time_linf").unwrap();
        let l2 = s.order("div_l2").unwrap();
        let h1 = s.order("div_h1").unwrap();
        let linf = s.order("div_linf").unwrap();
        pass &= (time - (kt + 1) as f64).abs() <= 0.3
            && (l2 - (ks + 1) as f64).abs() <= 0.3
            && (h1 - ks as f64).abs() <= 0.3
            && linf >= 0.5;
        detail.push(format!("({ks},{kt}): time {time:.2}, L2 {l2:.2}, H1 {h1:.2}, Linf {linf:.2}"));
    }
    let elapsed = start.elapsed();
    outcome(pass && within(elapsed, 120.0), format!("{}; {:.1} s", detail.join("; "), elapsed.as_secs_f64()))
}

fn refinement(ks: usize, kt: usize, base_n: usize) -> ConvergenceStudy {
    ConvergenceStudy {
        data: taylor_green(0.01, 1.0),
        config: SolverConfig::default(),
        ks,
        kt,
        base_n,
        base_slabs: base_n / 2,
        levels: 4,
    }
}

fn bump_test_function(d: &Discretization) -> TensorTestFunction {
    let mode = TestMode {
        time: Box::new(|t: f64| (std::f64::consts::PI * t).cos()),
        space: Box::new(CurlBump::new([0.4, 0.55], 0.3, 1.0)),
    };
    TensorTestFunction::new(vec![mode], d).unwrap()
}

fn consistency() -> Outcome {
    let start = Instant::now();
    let study = refinement(1, 0, 4);
    let levels = study.solve_levels().unwrap();
    let test = bump_test_function(&levels[0].discretization);
    let alpha = study.config.penalty(study.ks);
    let report = consistency_residuals(&study.data, &levels, &test, alpha).unwrap();
    let elapsed = start.elapsed();
    let visc = report.metric("viscous").unwrap();
    let conv = report.metric("convective").unwrap();
    outcome(
        report.strictly_decreasing("viscous") && report.strictly_decreasing("convective") && within(elapsed, 300.0),
        format!("viscous {}, convective {}, {:.1} s", series(&visc), series(&conv), elapsed.as_secs_f64()),
    )
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (ks, kt) in [(1, 0), (2, 1)] {
        let study = refinement(ks, kt, 2);
        let s = convergence_metrics(&study.data, &study.solve_levels().unwrap()).unwrap();
        let err = s.metric("l2l2_error").unwrap();
        let cauchy = s.metric("cauchy_increment").unwrap();
        pass &= s.strictly_decreasing("l2l2_error") && s.strictly_decreasing("cauchy_increment");
        detail.push(format!("({ks},{kt}): error {}, Cauchy {}", series(&err), series(&cauchy)));
    }
    let elapsed = start.elapsed();
    outcome(pass && within(elapsed, 300.0), format!("{}; {:.1} s", detail.join("; "), elapsed.as_secs_f64()))
}

fn constants() -> Outcome {
    let start = Instant::now();
    let mut study = ConstantStudy::new(2, 1, 32.0, SEED);
    study.time_data = Some(taylor_green(0.01, 1.0));
    let report = constant_estimates(&study).unwrap();
    let failing: Vec<&str> = report.measured().into_iter().filter(|n| !report.bounded(n)).collect();
    let mut control = ConstantStudy::new(2, 1, 0.01, SEED);
    control.levels = 1;
    let control = constant_estimates(&control).unwrap();
    let elapsed = start.elapsed();
    let coercivity: Vec<f64> = report.levels.iter().map(|l| l.coercivity).collect();
    outcome(
        failing.is_empty() && report.coercive() && !control.coercive() && within(elapsed, 120.0),
        format!(
            "{} constants measured, unbounded {failing:?}, coercivity {}, control coercivity {:.3e}, {:.1} s",
            report.measured().len(),
            series(&coercivity),
            control.levels[0].coercivity,
            elapsed.as_secs_f64()
        ),
    )
}

fn condensation(b: &Benchmark) -> Outcome {
    let data = taylor_green(0.01, 1.0);
    let slab = b.layout.slabs().next().unwrap();
    let direct = &b.run.states[0];
    let config = SolverConfig { static_condensation: true, ..b.config.clone() };
    let condensed = picard_solve_slab(&b.d, slab, &b.run.initial, &data, &config).unwrap();
    let diff = coefficient_difference(&condensed.solution, &direct.solution);
    outcome(diff <= 1e-9, format!("max relative coefficient difference {diff:.2e}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    let (c1, c2, c3) = identities();
    report(1, "operator identities", c1);
    report(2, "convection dissipation identity", c2);
    report(3, "lifting identities", c3);
    let b = benchmark();
    report(4, "conformity", conformity(&b));
    report(5, "energy identity and inequality", energy(&b));
    report(6, "projection rates", projections());
    report(7, "consistency residuals", consistency());
    report(8, "convergence surrogate", convergence());
    report(9, "inequality constants", constants());
    report(10, "static condensation", condensation(&b));

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed, {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
