//! Measured constants of the discrete inequalities over a refinement
//! sequence: Poincaré, lifting, coercivity and boundedness of the viscous
//! form, the `1,h` norm bound, the convective bound and the dual bound of
//! the discrete time derivative.
//!
//! Coercivity, boundedness and Poincaré constants are extreme generalized
//! Rayleigh quotients against the `|||.|||_v` Gram matrix, found by
//! (shifted) power iteration; the others are maxima over seeded samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bounded_trend, case_seed, fmt, random_pair, random_solenoidal, write_csv};
use crate::error::Result;
use crate::forms::{assemble_a_h_unchecked, assemble_mass, assemble_o_h};
use crate::liftings::{discrete_time_derivative, SpatialLifting};
use crate::linalg::{CsrMatrix, Entry, SparseLu};
use crate::mesh::{Rectangle, SpaceTimeLayout, SpatialMesh};
use crate::projections::DivProjector;
use crate::solver::{run_simulation, ProblemData, SolverConfig};
use crate::spaces::{integrated_norm_v_sq, l2_norm, mismatch_norm_sq, norm_1h, norm_v, DiscreteField, Discretization, SlabSpace};

/// Parameters of [`constant_estimates`].
#[derive(Debug, Clone)]
pub struct ConstantStudy {
    pub base_n: usize,
    pub levels: usize,
    pub ks: usize,
    pub kt: usize,
    pub alpha: f64,
    pub samples: usize,
    pub power_iterations: usize,
    pub seed: u64,
    /// Problem whose solution enters the time-derivative bound (`None`
    /// skips it). Level `l` uses `base_n * 2^l` slabs.
    pub time_data: Option<ProblemData>,
}

impl ConstantStudy {
    pub fn new(ks: usize, kt: usize, alpha: f64, seed: u64) -> Self {
        ConstantStudy { base_n: 2, levels: 3, ks, kt, alpha, samples: 20, power_iterations: 200, seed, time_data: None }
    }
}

/// Measured constants on one mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLevel {
    pub n: usize,
    pub h: f64,
    /// `sup |v|_{L^2} / |||v|||_v`.
    pub poincare: f64,
    /// `sup |R(v - v_bar)|^2 / sum h_K^{-1} |v - v_bar|^2_{dK}`.
    pub lifting: f64,
    /// `inf a_h(v, v) / |||v|||_v^2`.
    pub coercivity: f64,
    /// `sup |a_h(u, v)| / (|||u|||_v |||v|||_v)`.
    pub boundedness: f64,
    /// `sup |v|_{1,h} / |||v|||_v`.
    pub h1_norm: f64,
    /// `sup |o_h(u; u, v)| / (|u|_{L^2} |||u|||_v |||v|||_v)`.
    pub convection: f64,
    /// `sup |int (D_t u_h, v)| / (int |||v|||_v^2)^{1/2}`; `NaN` if skipped.
    pub time_derivative: f64,
}

pub const CONSTANT_NAMES: [&str; 7] =
    ["poincare", "lifting", "coercivity", "boundedness", "h1_norm", "convection", "time_derivative"];

impl ConstantLevel {
    /// Value whose boundedness is checked; for coercivity this is the
    /// inverse constant (infinite if coercivity fails).
    pub fn bounded_quantity(&self, name: &str) -> f64 {
        match name {
            "poincare" => self.poincare,
            "lifting" => self.lifting,
            "coercivity" => {
                if self.coercivity > 0.0 {
                    1.0 / self.coercivity
                } else {
                    f64::INFINITY
                }
            }
            "boundedness" => self.boundedness,
            "h1_norm" => self.h1_norm,
            "convection" => self.convection,
            "time_derivative" => self.time_derivative,
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReport {
    pub alpha: f64,
    pub levels: Vec<ConstantLevel>,
}

impl ConstantReport {
    pub fn series(&self, name: &str) -> Vec<f64> {
        self.levels.iter().map(|l| l.bounded_quantity(name)).collect()
    }

    /// Final level at most 1.2 times the running maximum of the earlier
    /// levels.
    pub fn bounded(&self, name: &str) -> bool {
        bounded_trend(&self.series(name), 1.2)
    }

    pub fn coercive(&self) -> bool {
        self.levels.iter().all(|l| l.coercivity > 0.0)
    }

    /// Names of all measured constants (skipping the time-derivative bound
    /// when it was not computed).
    pub fn measured(&self) -> Vec<&'static str> {
        CONSTANT_NAMES
            .iter()
            .copied()
            .filter(|n| *n != "time_derivative" || self.levels.iter().all(|l| !l.time_derivative.is_nan()))
            .collect()
    }

    pub fn all_bounded(&self) -> bool {
        self.measured().iter().all(|n| self.bounded(n))
    }

    /// Header `n,h,<constants>`.
    pub fn to_csv(&self) -> Result<String> {
        let mut header = vec!["n", "h"];
        header.extend(CONSTANT_NAMES);
        let rows: Vec<Vec<String>> = self
            .levels
            .iter()
            .map(|l| {
                vec![
                    l.n.to_string(),
                    fmt(l.h),
                    fmt(l.poincare),
                    fmt(l.lifting),
                    fmt(l.coercivity),
                    fmt(l.boundedness),
                    fmt(l.h1_norm),
                    fmt(l.convection),
                    fmt(l.time_derivative),
                ]
            })
            .collect();
        write_csv(&header, &rows)
    }
}

/// Element velocity and interior facet velocity unknowns of the
/// single-level layout.
fn free_velocity_dofs(space: &SlabSpace) -> Vec<usize> {
    let mut idx = Vec::new();
    for k in 0..space.n_elements() {
        for c in 0..2 {
            idx.extend((0..space.n_velocity_basis()).map(|i| space.spatial_u(k, c, i)));
        }
    }
    for f in (0..space.n_faces()).filter(|&f| !space.is_boundary_face(f)) {
        for c in 0..2 {
            idx.extend((0..space.n_facet_basis()).map(|j| space.spatial_ubar(f, c, j)));
        }
    }
    idx
}

/// `sum_K int_K grad u_c . grad v_c` on the single-level layout.
fn broken_stiffness(d: &Discretization) -> CsrMatrix {
    let s = d.space();
    let t = d.tables();
    let np = s.n_velocity_basis();
    let mut entries: Vec<Entry> = Vec::new();
    for k in 0..d.n_elements() {
        let g = d.geometry(k);
        let mut local = vec![0.0; np * np];
        for (q, w) in t.volume_rule.weights.iter().enumerate() {
            let grads: Vec<[f64; 2]> = t.volume_gradients[q][..np].iter().map(|&r| g.physical_gradient(r)).collect();
            for i in 0..np {
                for j in 0..np {
                    local[i * np + j] += w * g.det * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
        for c in 0..2 {
            for i in 0..np {
                for j in 0..np {
                    entries.push((s.spatial_u(k, c, i), s.spatial_u(k, c, j), local[i * np + j]));
                }
            }
        }
    }
    CsrMatrix::from_entries(s.n_spatial(), s.n_spatial(), entries)
}

/// Extreme Rayleigh quotients `x^T A x / x^T N x` by power iteration on
/// `N^{-1} A` and on the shifted operator `c I - N^{-1} A`. Returns
/// `(min, max)` over all iterates.
fn rayleigh_extremes(a: &CsrMatrix, n: &CsrMatrix, lu: &SparseLu, iterations: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let dim = a.n_rows();
    let quotient = |x: &[f64]| a.bilinear(x, x) / n.bilinear(x, x);
    let normalise = |x: &mut Vec<f64>| {
        let s = n.bilinear(x, x).sqrt();
        x.iter_mut().for_each(|v| *v /= s);
    };
    let start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut x = start.clone();
    normalise(&mut x);
    let mut max = quotient(&x);
    let mut min = max;
    for _ in 0..iterations {
        let mut y = lu.solve(&a.matvec(&x))?;
        normalise(&mut y);
        x = y;
        let q = quotient(&x);
        max = max.max(q);
        min = min.min(q);
    }
    let shift = max.abs() * 1.05 + 1e-12;
    let mut x = start;
    normalise(&mut x);
    for _ in 0..iterations {
        let ax = lu.solve(&a.matvec(&x))?;
        let mut y: Vec<f64> = x.iter().zip(&ax).map(|(xi, ai)| shift * xi - ai).collect();
        normalise(&mut y);
        x = y;
        let q = quotient(&x);
        min = min.min(q);
        max = max.max(q);
    }
    Ok((min, max))
}

fn spatial_constants(d: &Discretization, study: &ConstantStudy, rng: &mut ChaCha8Rng) -> Result<ConstantLevel> {
    let snap = d.snapshot();
    let space = snap.space();
    let free = free_velocity_dofs(space);
    let a_full = assemble_a_h_unchecked(&snap, study.alpha);
    let penalty = assemble_a_h_unchecked(&snap, 1.0).add_scaled(&assemble_a_h_unchecked(&snap, 0.0), -1.0);
    let gram = broken_stiffness(&snap).add_scaled(&penalty, 1.0).submatrix(&free);
    let a = a_full.submatrix(&free);
    let mass = assemble_mass(&snap).submatrix(&free);
    let lu = SparseLu::new(&gram)?;
    let (coercivity, top) = rayleigh_extremes(&a, &gram, &lu, study.power_iterations, rng)?;
    let (_, poincare_sq) = rayleigh_extremes(&mass, &gram, &lu, study.power_iterations, rng)?;

    let lift = SpatialLifting::new(&snap, d.spatial_degree())?;
    let div = DivProjector::new(&snap);
    let mut out = ConstantLevel {
        n: 0,
        h: d.mesh().mesh_size(),
        poincare: poincare_sq.max(0.0).sqrt(),
        lifting: 0.0,
        coercivity,
        boundedness: top.abs().max(coercivity.abs()),
        h1_norm: 0.0,
        convection: 0.0,
        time_derivative: f64::NAN,
    };
    for _ in 0..study.samples {
        let u = random_pair(space, rng);
        let v = random_pair(space, rng);
        let (nu, nv) = (norm_v(&snap, &u), norm_v(&snap, &v));
        let (uv, vv) = (space.pair_vector(&u), space.pair_vector(&v));
        out.coercivity = out.coercivity.min(a_full.bilinear(&uv, &uv) / (nu * nu));
        out.boundedness = out.boundedness.max(a_full.bilinear(&vv, &uv).abs() / (nu * nv));
        out.poincare = out.poincare.max(l2_norm(&snap, &u.element) / nu);
        out.h1_norm = out.h1_norm.max(norm_1h(&snap, &u.element) / nu);
        let r = lift.lift_mismatch(&snap, &u)?;
        out.lifting = out.lifting.max(r.l2_norm_sq(&snap) / mismatch_norm_sq(&snap, &u));

        let mut w = u.clone();
        w.element = random_solenoidal(space, &div, rng)?;
        let o = assemble_o_h(&snap, &w.element)?;
        let nw = norm_v(&snap, &w);
        let ratio = o.bilinear(&vv, &space.pair_vector(&w)).abs() / (l2_norm(&snap, &w.element) * nw * nv);
        out.convection = out.convection.max(ratio);
    }
    Ok(out)
}

/// `int_{I_n} (a, b) dt` for element velocities on one slab.
fn slab_inner(d: &Discretization, dt: f64, a: &DiscreteField, b: &DiscreteField) -> f64 {
    let (ne, nc, nb) = a.shape();
    let nt = a.n_modes();
    let mut s = 0.0;
    for k in 0..ne {
        let det = d.geometry(k).det;
        for c in 0..nc {
            for i in 0..nb {
                for m in 0..nt {
                    s += det * dt / (2.0 * m as f64 + 1.0) * a.coefficient(k, c, i, m) * b.coefficient(k, c, i, m);
                }
            }
        }
    }
    s
}

fn time_derivative_constant(
    d: &Discretization,
    data: &ProblemData,
    slabs: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let layout = SpaceTimeLayout::uniform(data.final_time, slabs)?;
    let run = run_simulation(d, &layout, data, &SolverConfig::default())?;
    let space = d.space();
    let div = DivProjector::new(d);
    let mut worst = 0.0f64;
    let derivatives: Vec<DiscreteField> = run
        .states
        .iter()
        .map(|s| discrete_time_derivative(s.slab, &s.velocity.element, Some(&s.incoming)))
        .collect::<Result<_>>()?;
    for _ in 0..samples {
        let mut num = 0.0;
        let mut den = 0.0;
        for (state, dt_u) in run.states.iter().zip(&derivatives) {
            let mut v = random_pair(space, rng);
            v.element = random_solenoidal(space, &div, rng)?;
            let v = v.on_slab(state.slab);
            num += slab_inner(d, state.slab.dt(), dt_u, &v.element);
            den += integrated_norm_v_sq(d, state.slab.dt(), &v);
        }
        worst = worst.max(num.abs() / den.sqrt());
    }
    Ok(worst)
}

/// Measures every constant on `levels` uniformly refined meshes.
pub fn constant_estimates(study: &ConstantStudy) -> Result<ConstantReport> {
    let mut levels = Vec::with_capacity(study.levels);
    for l in 0..study.levels {
        let n = study.base_n << l;
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(study.seed, l as u64));
        let d = Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square())?, study.ks, study.kt)?;
        let mut level = spatial_constants(&d, study, &mut rng)?;
        level.n = n;
        if let Some(data) = &study.time_data {
            level.time_derivative = time_derivative_constant(&d, data, n, study.samples, &mut rng)?;
        }
        levels.push(level);
    }
    Ok(ConstantReport { alpha: study.alpha, levels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coercivity_positive_for_default_penalty_and_lost_for_small_penalty() {
        let mut study = ConstantStudy::new(1, 0, 8.0, 3);
        study.levels = 1;
        study.samples = 4;
        let r = constant_estimates(&study).unwrap();
        assert!(r.coercive(), "{:?}", r.levels);
        study.alpha = 0.01;
        let r = constant_estimates(&study).unwrap();
        assert!(!r.coercive(), "{:?}", r.levels);
    }
}
