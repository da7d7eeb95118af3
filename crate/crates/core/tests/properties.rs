//! Property tests over randomly drawn inputs.

use proptest::prelude::*;

use sthdg::basis::{quadrature, QuadratureDomain};
use sthdg::cli::{BenchmarkChoice, MeshSource, RunConfig};
use sthdg::mesh::{build_face_topology, Slab};
use sthdg::projections::{eval_time, project_time};
use sthdg::solver::Benchmark;
use sthdg::verify::{identity_suite, IdentityCheck};
use sthdg::{Discretization, Rectangle, SpatialMesh};

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_rule_integrates_monomials(a in 0u32..8, b in 0u32..8, extra in 0usize..3) {
        let rule = quadrature(QuadratureDomain::Triangle, (a + b) as usize + extra).unwrap();
        let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        let approx = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
        prop_assert!(((approx - exact) / exact).abs() <= 1e-13);
    }

    #[test]
    fn time_projection_reproduces_polynomials(
        kt in 0usize..4,
        coeffs in proptest::collection::vec(-2.0f64..2.0, 4),
        start in -1.0f64..1.0,
        dt in 0.01f64..2.0,
    ) {
        let poly = |t: f64| coeffs.iter().take(kt + 1).rev().fold(0.0, |acc, c| acc * t + c);
        let slab = Slab { index: 0, start, end: start + dt };
        let c = project_time(&poly, slab, kt);
        for j in 0..=8 {
            let t = start + dt * j as f64 / 8.0;
            prop_assert!((eval_time(&c, slab, t) - poly(t)).abs() <= 1e-11);
        }
    }

    #[test]
    fn refinement_preserves_area_and_quadruples_elements(n in 1usize..5, sx in 0.5f64..3.0, sy in 0.5f64..3.0) {
        let domain = Rectangle { min: [0.0, 0.0], max: [sx, sy] };
        let mesh = SpatialMesh::build_uniform(n, domain).unwrap();
        let fine = mesh.refine_uniform();
        prop_assert_eq!(fine.n_elements(), 4 * mesh.n_elements());
        prop_assert!((fine.total_area() - sx * sy).abs() <= 1e-12 * sx * sy);
        let faces = build_face_topology(&fine).unwrap();
        // Euler relation for a triangulated disc: V - E + F = 1.
        prop_assert_eq!(fine.n_vertices() + fine.n_elements(), faces.n_faces() + 1);
    }

    #[test]
    fn config_text_round_trips(
        n in 1usize..64,
        ks in 1usize..4,
        kt in 0usize..3,
        slabs in 1usize..32,
        nu in 1e-4f64..10.0,
        alpha in proptest::option::of(0.1f64..100.0),
        bench in 0usize..3,
        seed in any::<u64>(),
        condensed in any::<bool>(),
    ) {
        let c = RunConfig {
            mesh: MeshSource::Builtin(n),
            ks,
            kt,
            slabs,
            nu,
            alpha,
            benchmark: BenchmarkChoice::Builtin(Benchmark::ALL[bench]),
            seed,
            static_condensation: condensed,
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn forms_identities_hold_for_any_seed(seed in any::<u64>(), ks in 1usize..3, kt in 0usize..2) {
        let d = Discretization::new(SpatialMesh::build_uniform(2, Rectangle::unit_square()).unwrap(), ks, kt).unwrap();
        let report = identity_suite(&d, 8.0 * (ks * ks) as f64, seed, 1).unwrap();
        prop_assert!(report.max_residual(IdentityCheck::Viscous) <= 1e-10);
        prop_assert!(report.max_residual(IdentityCheck::Convection) <= 1e-10);
        prop_assert!(report.max_residual(IdentityCheck::Dissipation) <= 1e-12);
        prop_assert!(report.min_dissipation() >= -1e-12);
    }
}
