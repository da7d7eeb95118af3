use super::{quadrature, QuadratureDomain};
use crate::error::Result;

/// `dim P_k` on a triangle.
pub fn simplex_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Orthonormal hierarchical basis of `P_k` on the reference triangle.
///
/// Collapsed-coordinate (Dubiner) products, written in homogeneous form so
/// they are polynomial everywhere including the vertex `(0, 1)`. Functions
/// are ordered by total degree, so the first `simplex_dim(j)` functions span
/// `P_j` for every `j <= k`. The first function is the constant `sqrt(2)`.
#[derive(Debug, Clone)]
pub struct SimplexBasis {
    degree: usize,
    /// Index pairs `(a, b)`, total degree `a + b`.
    indices: Vec<(usize, usize)>,
    scale: Vec<f64>,
}

/// `Q_a(u, w) = w^a L_a(u / w)` and its partial derivatives.
fn homogeneous_legendre(k: usize, u: f64, w: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut q = vec![0.0; k + 1];
    let mut qu = vec![0.0; k + 1];
    let mut qw = vec![0.0; k + 1];
    q[0] = 1.0;
    if k >= 1 {
        q[1] = u;
        qu[1] = 1.0;
    }
    for a in 1..k {
        let af = a as f64;
        let c = 2.0 * af + 1.0;
        q[a + 1] = (c * u * q[a] - af * w * w * q[a - 1]) / (af + 1.0);
        qu[a + 1] = (c * (q[a] + u * qu[a]) - af * w * w * qu[a - 1]) / (af + 1.0);
        qw[a + 1] = (c * u * qw[a] - af * (2.0 * w * q[a - 1] + w * w * qw[a - 1])) / (af + 1.0);
    }
    (q, qu, qw)
}

/// Jacobi polynomials `P_n^{(alpha, 0)}(z)`, `n <= k`, and derivatives.
fn jacobi(k: usize, alpha: f64, z: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; k + 1];
    let mut d = vec![0.0; k + 1];
    p[0] = 1.0;
    if k >= 1 {
        p[1] = 0.5 * ((alpha + 2.0) * z + alpha);
        d[1] = 0.5 * (alpha + 2.0);
    }
    for n in 2..=k {
        let nf = n as f64;
        let s = 2.0 * nf + alpha;
        let a0 = 2.0 * nf * (nf + alpha) * (s - 2.0);
        let a1 = (s - 1.0) * s * (s - 2.0);
        let a2 = (s - 1.0) * alpha * alpha;
        let a3 = 2.0 * (nf + alpha - 1.0) * (nf - 1.0) * s;
        p[n] = ((a1 * z + a2) * p[n - 1] - a3 * p[n - 2]) / a0;
        d[n] = (a1 * p[n - 1] + (a1 * z + a2) * d[n - 1] - a3 * d[n - 2]) / a0;
    }
    (p, d)
}

impl SimplexBasis {
    pub fn new(degree: usize) -> Result<Self> {
        let mut indices = Vec::with_capacity(simplex_dim(degree));
        for d in 0..=degree {
            for b in 0..=d {
                indices.push((d - b, b));
            }
        }
        let mut basis = SimplexBasis { degree, indices, scale: vec![1.0; simplex_dim(degree)] };
        let rule = quadrature(QuadratureDomain::Triangle, 2 * degree)?;
        let mut norms = vec![0.0; basis.dim()];
        for (p, w) in rule.iter() {
            let (v, _) = basis.evaluate(p);
            for (n, v) in norms.iter_mut().zip(&v) {
                *n += w * v * v;
            }
        }
        basis.scale = norms.iter().map(|n| 1.0 / n.sqrt()).collect();
        Ok(basis)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Values and reference gradients of all basis functions at `p`.
    pub fn evaluate(&self, p: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let k = self.degree;
        let (x, y) = (p[0], p[1]);
        let (q, qu, qw) = homogeneous_legendre(k, 2.0 * x + y - 1.0, 1.0 - y);
        let n = self.dim();
        let mut values = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        let mut jac: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(k + 1);
        for a in 0..=k {
            jac.push(jacobi(k - a, 2.0 * a as f64 + 1.0, 2.0 * y - 1.0));
        }
        for (i, &(a, b)) in self.indices.iter().enumerate() {
            let (pj, dj) = (&jac[a].0[b], &jac[a].1[b]);
            let s = self.scale[i];
            values[i] = s * q[a] * pj;
            // d/dx = 2 d/du; d/dy = d/du - d/dw; Jacobi argument 2y - 1.
            let gx = 2.0 * qu[a] * pj;
            let gy = (qu[a] - qw[a]) * pj + q[a] * 2.0 * dj;
            grads[i] = [s * gx, s * gy];
        }
        (values, grads)
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        self.evaluate(p).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(simplex_dim(0), 1);
        assert_eq!(simplex_dim(1), 3);
        assert_eq!(simplex_dim(4), 15);
        assert_eq!(SimplexBasis::new(3).unwrap().dim(), 10);
    }

    #[test]
    fn orthonormal_on_reference_triangle() {
        for k in 0..=6 {
            let b = SimplexBasis::new(k).unwrap();
            let r = quadrature(QuadratureDomain::Triangle, 2 * k).unwrap();
            let n = b.dim();
            let mut m = vec![vec![0.0; n]; n];
            for (p, w) in r.iter() {
                let v = b.values(p);
                for i in 0..n {
                    for j in 0..n {
                        m[i][j] += w * v[i] * v[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((m[i][j] - e).abs() < 1e-12, "k={k} ({i},{j}) {}", m[i][j]);
                }
            }
        }
    }

    #[test]
    fn finite_at_top_vertex() {
        let b = SimplexBasis::new(4).unwrap();
        let (v, g) = b.evaluate([0.0, 1.0]);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(g.iter().all(|x| x[0].is_finite() && x[1].is_finite()));
        let near = b.values([1e-9, 1.0 - 1e-9]);
        for i in 0..b.dim() {
            assert!((near[i] - v[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn first_function_is_constant() {
        let b = SimplexBasis::new(2).unwrap();
        for p in [[0.1, 0.2], [0.5, 0.3]] {
            let (v, g) = b.evaluate(p);
            assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
            assert!(g[0][0].abs() < 1e-14 && g[0][1].abs() < 1e-14);
        }
    }

    #[test]
    fn hierarchical_prefix() {
        let lo = SimplexBasis::new(2).unwrap();
        let hi = SimplexBasis::new(4).unwrap();
        let p = [0.27, 0.41];
        let a = lo.values(p);
        let b = hi.values(p);
        for i in 0..lo.dim() {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = SimplexBasis::new(3).unwrap();
        let p = [0.3, 0.25];
        let e = 1e-6;
        let (_, g) = b.evaluate(p);
        let vx1 = b.values([p[0] + e, p[1]]);
        let vx0 = b.values([p[0] - e, p[1]]);
        let vy1 = b.values([p[0], p[1] + e]);
        let vy0 = b.values([p[0], p[1] - e]);
        for i in 0..b.dim() {
            assert!((g[i][0] - (vx1[i] - vx0[i]) / (2.0 * e)).abs() < 1e-6);
            assert!((g[i][1] - (vy1[i] - vy0[i]) / (2.0 * e)).abs() < 1e-6);
        }
    }
}
