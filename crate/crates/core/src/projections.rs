//! L2 projections onto the discrete spaces, the DG time projection and
//! tensor-product test functions.

use crate::basis::{quadrature, LegendreBasis, QuadratureDomain};
use crate::error::{HdgError, Result};
use crate::forms::{assemble_b_h, assemble_mass, assemble_mean_constraint};
use crate::linalg::{solve_sparse, CsrMatrix, Entry};
use crate::mesh::{Point, Slab};
use crate::spaces::{DiscreteField, Discretization, FieldRole, VelocityPair};

/// Smooth vector field with an analytic gradient, `gradient[c][d] = d_d v_c`.
pub trait VectorField: Send + Sync {
    fn value(&self, x: Point) -> [f64; 2];
    fn gradient(&self, x: Point) -> [[f64; 2]; 2];

    fn divergence(&self, x: Point) -> f64 {
        let g = self.gradient(x);
        g[0][0] + g[1][1]
    }
}

/// `psi = (d_y s, -d_x s)` for the compactly supported bump
/// `s = amplitude * B((x - cx) / r) B((y - cy) / r)`, `B(z) = (1 - z^2)^4` on
/// `|z| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurlBump {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
}

impl CurlBump {
    pub fn new(center: Point, radius: f64, amplitude: f64) -> Self {
        CurlBump { center, radius, amplitude }
    }

    /// `B`, `B'`, `B''` with respect to the physical coordinate.
    fn profile(&self, x: f64, c: f64) -> [f64; 3] {
        let r = self.radius;
        let z = (x - c) / r;
        if z.abs() >= 1.0 {
            return [0.0; 3];
        }
        let a = 1.0 - z * z;
        let b = a.powi(4);
        let db = 4.0 * a.powi(3) * (-2.0 * z) / r;
        let ddb = (12.0 * a * a * 4.0 * z * z - 8.0 * a.powi(3)) / (r * r);
        [b, db, ddb]
    }

    /// Stream function value.
    pub fn stream(&self, x: Point) -> f64 {
        self.amplitude * self.profile(x[0], self.center[0])[0] * self.profile(x[1], self.center[1])[0]
    }
}

impl VectorField for CurlBump {
    fn value(&self, x: Point) -> [f64; 2] {
        let bx = self.profile(x[0], self.center[0]);
        let by = self.profile(x[1], self.center[1]);
        [self.amplitude * bx[0] * by[1], -self.amplitude * bx[1] * by[0]]
    }

    fn gradient(&self, x: Point) -> [[f64; 2]; 2] {
        let bx = self.profile(x[0], self.center[0]);
        let by = self.profile(x[1], self.center[1]);
        let a = self.amplitude;
        [[a * bx[1] * by[1], a * bx[0] * by[2]], [-a * bx[2] * by[0], -a * bx[1] * by[1]]]
    }
}

/// A vector field given by closures for value and gradient.
pub struct FnField<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> VectorField for FnField<V, G>
where
    V: Fn(Point) -> [f64; 2] + Send + Sync,
    G: Fn(Point) -> [[f64; 2]; 2] + Send + Sync,
{
    fn value(&self, x: Point) -> [f64; 2] {
        (self.value)(x)
    }

    fn gradient(&self, x: Point) -> [[f64; 2]; 2] {
        (self.gradient)(x)
    }
}

/// Temporal L2 projection onto `P_{k_t}(I_n)`: Legendre coefficients.
pub fn project_time(g: &dyn Fn(f64) -> f64, slab: Slab, kt: usize) -> Vec<f64> {
    let basis = LegendreBasis::new(kt);
    let rule = quadrature(QuadratureDomain::Interval, 2 * kt + 24).expect("supported degree");
    let mut c = vec![0.0; kt + 1];
    for (p, w) in rule.iter() {
        let v = basis.values(p[0]);
        let gv = g(slab.time(p[0]));
        for m in 0..=kt {
            c[m] += 0.5 * (2.0 * m as f64 + 1.0) * w * gv * v[m];
        }
    }
    c
}

/// DG time projection: `p(t_n) = eta(t_n)` and `eta - p` orthogonal to
/// `P_{k_t - 1}(I_n)`.
pub fn dg_time_projection(eta: &dyn Fn(f64) -> f64, slab: Slab, kt: usize) -> Vec<f64> {
    let mut c = project_time(eta, slab, kt);
    let left = LegendreBasis::new(kt).left_values();
    let partial: f64 = (0..kt).map(|m| c[m] * left[m]).sum();
    c[kt] = left[kt] * (eta(slab.start) - partial);
    c
}

/// Evaluates Legendre coefficients at time `t` of `slab`.
pub fn eval_time(coefficients: &[f64], slab: Slab, t: f64) -> f64 {
    let v = LegendreBasis::new(coefficients.len() - 1).values(slab.reference(t));
    coefficients.iter().zip(&v).map(|(a, b)| a * b).sum()
}

/// Element-wise L2 projection of a vector function onto `P_{k_s}(K)^2`
/// (single-level element velocity).
pub fn project_element(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> DiscreteField {
    let s = d.snapshot();
    let mut out = s.space().zero_field(FieldRole::ElementVelocity);
    let t = d.tables();
    let np = d.space().n_velocity_basis();
    for k in 0..d.n_elements() {
        let geo = d.geometry(k);
        for (q, w) in t.volume_rule.weights.iter().enumerate() {
            let gv = g(geo.map(t.volume_rule.points[q]));
            for c in 0..2 {
                for i in 0..np {
                    // Orthonormal reference basis: the element mass is det J * I.
                    *out.coefficient_mut(k, c, i, 0) += w * gv[c] * t.volume_values[q][i];
                }
            }
        }
    }
    out
}

/// Element-wise L2 projection of a scalar function onto `P_{k_s - 1}(K)`.
pub fn project_element_scalar(d: &Discretization, g: &(dyn Fn(Point) -> f64 + Sync)) -> DiscreteField {
    let s = d.snapshot();
    let mut out = s.space().zero_field(FieldRole::ElementPressure);
    let t = d.tables();
    let nq = d.space().n_pressure_basis();
    for k in 0..d.n_elements() {
        let geo = d.geometry(k);
        for (q, w) in t.volume_rule.weights.iter().enumerate() {
            let gv = g(geo.map(t.volume_rule.points[q]));
            for i in 0..nq {
                *out.coefficient_mut(k, 0, i, 0) += w * gv * t.volume_values[q][i];
            }
        }
    }
    out
}

fn project_facet_impl(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync), boundary: bool) -> Result<DiscreteField> {
    let s = d.snapshot();
    let mut out = s.space().zero_field(FieldRole::FacetVelocity);
    let rule = &d.tables().edge_rule;
    let fb = &d.tables().facet_basis;
    for f in 0..d.n_faces() {
        if d.faces().face(f).is_boundary() && !boundary {
            continue;
        }
        for (p, w) in rule.iter() {
            let gv = g(d.face_point(f, p[0]));
            if !gv.iter().all(|v| v.is_finite()) {
                return Err(HdgError::Precondition(format!(
                    "facet projection needs finite traces; face {f} has a non-finite value"
                )));
            }
            let psi = fb.values(p[0]);
            for c in 0..2 {
                for (j, v) in psi.iter().enumerate() {
                    // Facet mass is |F| I; weights already carry no length.
                    *out.coefficient_mut(f, c, j, 0) += w * gv[c] * v;
                }
            }
        }
    }
    Ok(out)
}

/// Face-by-face L2 projection onto `P_{k_s}(F)^2`, zero on boundary faces.
/// Input must have finite traces (`Precondition` error otherwise).
pub fn project_facet(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> Result<DiscreteField> {
    project_facet_impl(d, g, false)
}

/// Face-by-face L2 projection on every face, boundary faces included.
pub fn project_facet_all(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> Result<DiscreteField> {
    project_facet_impl(d, g, true)
}

/// Element and facet projections of `g` on every face. For `g` in
/// `P_{k_s}^2` this is the conforming pair with `v_bar = trace v`.
pub fn interpolate_pair(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> VelocityPair {
    VelocityPair { element: project_element(d, g), facet: project_facet_all(d, g).expect("finite field") }
}

/// L2 projection onto the discretely divergence-free subspace, computed by
/// the saddle system `(w, v) + b_h(v, q) = (g, v)`, `b_h(w, q') = 0`, with
/// the pressure mean fixed by a multiplier.
#[derive(Debug, Clone)]
pub struct DivProjector {
    matrix: CsrMatrix,
    mass: CsrMatrix,
    space: crate::spaces::SlabSpace,
}

impl DivProjector {
    pub fn new(d: &Discretization) -> Self {
        let snap = d.snapshot();
        let s = snap.space();
        let n = s.n_spatial();
        let mass = assemble_mass(&snap);
        let b = assemble_b_h(&snap);
        let c = assemble_mean_constraint(&snap);
        let raw = mass.add_scaled(&b, 1.0).add_scaled(&b.transpose(), -1.0).add_scaled(&c, 1.0).add_scaled(&c.transpose(), 1.0);
        let mut fixed = vec![false; n];
        for f in 0..s.n_faces() {
            for c in 0..2 {
                for j in 0..s.n_facet_basis() {
                    fixed[s.spatial_ubar(f, c, j)] = true;
                }
            }
        }
        let mut entries: Vec<Entry> = raw.entries().filter(|&(i, j, _)| !fixed[i] && !fixed[j]).collect();
        entries.extend((0..n).filter(|&i| fixed[i]).map(|i| (i, i, 1.0)));
        DivProjector { matrix: CsrMatrix::from_entries(n, n, entries), mass, space: s.clone() }
    }

    fn solve(&self, rhs: Vec<f64>) -> Result<DiscreteField> {
        let x = solve_sparse(&self.matrix, &rhs).map_err(|e| match e {
            HdgError::Singular(m) => HdgError::Configuration(format!("divergence-free projection is singular: {m}")),
            other => other,
        })?;
        Ok(self.space.extract(FieldRole::ElementVelocity, &x))
    }

    /// Projection of a vector function.
    pub fn project(&self, d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> Result<DiscreteField> {
        let l2 = project_element(d, g);
        self.project_field(&l2)
    }

    /// Projection of a single-level element velocity (any L2 field is first
    /// reduced to its element projection, which leaves the result unchanged).
    pub fn project_field(&self, field: &DiscreteField) -> Result<DiscreteField> {
        let mut x = vec![0.0; self.space.n_dofs()];
        self.space.insert(field, &mut x);
        self.solve(self.mass.matvec(&x))
    }
}

/// Convenience wrapper building a [`DivProjector`] for one projection.
pub fn project_div(d: &Discretization, g: &(dyn Fn(Point) -> [f64; 2] + Sync)) -> Result<DiscreteField> {
    DivProjector::new(d).project(d, g)
}

/// Scalar temporal factor of a tensor test mode.
pub type TimeFactor = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// One mode `eta(t) psi(x)` of a tensor-product test function.
pub struct TestMode {
    pub time: TimeFactor,
    pub space: Box<dyn VectorField>,
}

/// `phi(x, t) = sum_k eta_k(t) psi_k(x)` with solenoidal `psi_k`.
pub struct TensorTestFunction {
    modes: Vec<TestMode>,
}

impl TensorTestFunction {
    /// Checks that every spatial factor is divergence free (to `1e-8`) at the
    /// volume quadrature points and vertices of `d`'s mesh.
    pub fn new(modes: Vec<TestMode>, d: &Discretization) -> Result<Self> {
        let t = d.tables();
        for (idx, mode) in modes.iter().enumerate() {
            let mut samples: Vec<Point> = d.mesh().vertices().to_vec();
            for k in 0..d.n_elements() {
                let g = d.geometry(k);
                samples.extend(t.volume_rule.points.iter().map(|&p| g.map(p)));
            }
            for x in samples {
                let div = mode.space.divergence(x);
                if div.abs() > 1e-8 {
                    return Err(HdgError::Data(format!(
                        "test mode {idx} is not solenoidal: divergence {div:e} at ({}, {})",
                        x[0], x[1]
                    )));
                }
            }
        }
        Ok(TensorTestFunction { modes })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn value(&self, x: Point, t: f64) -> [f64; 2] {
        let mut v = [0.0; 2];
        for m in &self.modes {
            let e = (m.time)(t);
            let s = m.space.value(x);
            v[0] += e * s[0];
            v[1] += e * s[1];
        }
        v
    }

    pub fn gradient(&self, x: Point, t: f64) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for m in &self.modes {
            let e = (m.time)(t);
            let s = m.space.gradient(x);
            for c in 0..2 {
                for dd in 0..2 {
                    g[c][dd] += e * s[c][dd];
                }
            }
        }
        g
    }

    /// Projected pair on one slab: `sum_k Pi^t eta_k * Pi^div psi_k` and
    /// `sum_k Pi^t eta_k * Pi_bar psi_k`.
    pub fn project(&self, d: &Discretization, slab: Slab, div: &DivProjector) -> Result<VelocityPair> {
        let nt = d.space().n_modes();
        let kt = d.temporal_degree();
        let mut pair = d.space().zero_pair();
        for mode in &self.modes {
            let tc = project_time(&*mode.time, slab, kt);
            let f = |x: Point| mode.space.value(x);
            let w = div.project(d, &f)?;
            let wb = project_facet(d, &f)?;
            for (dst, src) in [(&mut pair.element, &w), (&mut pair.facet, &wb)] {
                let blocks = src.coefficients().len();
                for b in 0..blocks {
                    for m in 0..nt {
                        dst.coefficients_mut()[b * nt + m] += tc[m] * src.coefficients()[b];
                    }
                }
            }
        }
        Ok(pair.on_slab(slab))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Rectangle, SpaceTimeLayout, SpatialMesh};

    fn disc(n: usize, ks: usize, kt: usize) -> Discretization {
        Discretization::new(SpatialMesh::build_uniform(n, Rectangle::unit_square()).unwrap(), ks, kt).unwrap()
    }

    #[test]
    fn time_projection_of_linear_function_k0() {
        let slab = SpaceTimeLayout::uniform(1.0, 1).unwrap().slab(0);
        let c = project_time(&|t| t, slab, 0);
        assert!((c[0] - 0.5).abs() < 1e-15);
        let c = project_time(&|t| 3.0 * t * t - 1.0, slab, 2);
        for t in [0.0, 0.3, 1.0] {
            assert!((eval_time(&c, slab, t) - (3.0 * t * t - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn dg_projection_endpoint_and_orthogonality() {
        let slab = SpaceTimeLayout::uniform(2.0, 4).unwrap().slab(1);
        let eta = |t: f64| (3.0 * t).sin();
        for kt in 0..=3 {
            let c = dg_time_projection(&eta, slab, kt);
            assert!((eval_time(&c, slab, slab.start) - eta(slab.start)).abs() < 1e-13);
            if kt == 0 {
                assert!((c[0] - eta(slab.start)).abs() < 1e-15);
            }
            let rule = quadrature(QuadratureDomain::Interval, 30).unwrap();
            for j in 0..kt {
                let r: f64 = rule
                    .iter()
                    .map(|(p, w)| {
                        let t = slab.time(p[0]);
                        w * (eta(t) - eval_time(&c, slab, t)) * LegendreBasis::new(j).values(p[0])[j]
                    })
                    .sum();
                assert!(r.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn curl_bump_is_solenoidal_and_gradient_matches_differences() {
        let b = CurlBump::new([0.5, 0.45], 0.3, 2.0);
        let h = 1e-6;
        for x in [[0.5, 0.5], [0.62, 0.31], [0.41, 0.6]] {
            assert!(b.divergence(x).abs() < 1e-12);
            let g = b.gradient(x);
            for dd in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[dd] += h;
                xm[dd] -= h;
                for c in 0..2 {
                    let fd = (b.value(xp)[c] - b.value(xm)[c]) / (2.0 * h);
                    assert!((fd - g[c][dd]).abs() < 1e-6);
                }
            }
        }
        assert_eq!(b.value([0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn element_projection_reproduces_polynomials() {
        let d = disc(2, 2, 0);
        let g = |x: Point| [x[0] * x[1] - 1.0, x[0] * x[0]];
        let p = project_element(&d, &g);
        for k in 0..d.n_elements() {
            let x = d.geometry(k).map([0.2, 0.1]);
            let e = d.evaluate(&p, k, x, None).unwrap();
            assert!((e.value[0] - g(x)[0]).abs() < 1e-13 && (e.value[1] - g(x)[1]).abs() < 1e-13);
        }
        let again = project_element(&d, &|x| {
            let (k, _) = d.mesh().locate(x).unwrap();
            let v = d.evaluate(&p, k, x, None).unwrap().value;
            [v[0], v[1]]
        });
        assert!(again.axpy(-1.0, &p).max_abs() < 1e-12);
    }

    #[test]
    fn facet_projection_zero_on_boundary() {
        let d = disc(2, 1, 0);
        let fb = project_facet(&d, &|x| [1.0 + x[0], 2.0]).unwrap();
        for f in 0..d.n_faces() {
            let v = d.evaluate_facet(&fb, f, 0.3, None).unwrap();
            if d.faces().face(f).is_boundary() {
                assert_eq!(v, vec![0.0, 0.0]);
            } else {
                let x = d.face_point(f, 0.3);
                assert!((v[0] - 1.0 - x[0]).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
            }
        }
        assert!(project_facet(&d, &|_| [f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn non_solenoidal_mode_rejected() {
        let d = disc(2, 1, 0);
        let mode = TestMode {
            time: Box::new(|_| 1.0),
            space: Box::new(FnField { value: |x: Point| [x[0], 0.0], gradient: |_: Point| [[1.0, 0.0], [0.0, 0.0]] }),
        };
        assert!(matches!(TensorTestFunction::new(vec![mode], &d), Err(HdgError::Data(_))));
    }
}
