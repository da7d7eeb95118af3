use crate::error::{HdgError, Result};

/// Highest polynomial exactness the rule generator supports.
pub const MAX_QUADRATURE_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureDomain {
    /// Reference triangle `(0,0), (1,0), (0,1)` (area 1/2).
    Triangle,
    /// Unit edge `[0, 1]`.
    Edge,
    /// Reference interval `[-1, 1]`.
    Interval,
}

/// Points and positive weights, exact for polynomials up to `degree`.
/// One-dimensional rules store the abscissa in `points[i][0]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub domain: QuadratureDomain,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// three-term recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = super::legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = super::legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Builds a rule exact to `degree` on `domain`: Gauss–Legendre on intervals
/// and edges, a collapsed (Duffy) tensor Gauss rule on the triangle.
pub fn quadrature(domain: QuadratureDomain, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(HdgError::Capability(format!(
            "quadrature degree {degree} exceeds the maximum supported degree {MAX_QUADRATURE_DEGREE}"
        )));
    }
    let n = degree / 2 + 1;
    let rule = match domain {
        QuadratureDomain::Interval => {
            let (x, w) = gauss_legendre(n);
            QuadratureRule { domain, points: x.iter().map(|&x| [x, 0.0]).collect(), weights: w, degree }
        }
        QuadratureDomain::Edge => {
            let (x, w) = gauss_legendre(n);
            QuadratureRule {
                domain,
                points: x.iter().map(|&x| [0.5 * (x + 1.0), 0.0]).collect(),
                weights: w.iter().map(|w| 0.5 * w).collect(),
                degree,
            }
        }
        QuadratureDomain::Triangle => {
            // (a, b) in [0,1]^2 -> (a (1 - b), b), Jacobian (1 - b) adds one
            // degree in b.
            let (xa, wa) = gauss_legendre(n);
            let (xb, wb) = gauss_legendre(degree.div_ceil(2) + 1);
            let mut points = Vec::with_capacity(xa.len() * xb.len());
            let mut weights = Vec::with_capacity(xa.len() * xb.len());
            for (&b, &wbj) in xb.iter().zip(&wb) {
                let b = 0.5 * (b + 1.0);
                for (&a, &wai) in xa.iter().zip(&wa) {
                    let a = 0.5 * (a + 1.0);
                    points.push([a * (1.0 - b), b]);
                    weights.push(0.25 * wai * wbj * (1.0 - b));
                }
            }
            QuadratureRule { domain, points, weights, degree }
        }
    };
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn interval_point_count() {
        let r = quadrature(QuadratureDomain::Interval, 3).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn interval_monomials() {
        for degree in 0..30 {
            let r = quadrature(QuadratureDomain::Interval, degree).unwrap();
            for p in 0..=degree as i32 {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let q = r.integrate(|x| x[0].powi(p));
                assert!((q - exact).abs() <= 1e-13 * exact.abs().max(1.0), "deg {degree} p {p}");
            }
        }
    }

    #[test]
    fn triangle_monomials_closed_form() {
        // int_T x^a y^b = a! b! / (a + b + 2)!
        for degree in [0, 1, 2, 5, 8, 14, 26] {
            let r = quadrature(QuadratureDomain::Triangle, degree).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let q = r.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    assert!((q - exact).abs() <= 1e-13 * exact, "degree {degree}: x^{a} y^{b}");
                }
            }
        }
        let r = quadrature(QuadratureDomain::Triangle, 0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edge_rule_on_unit_interval() {
        let r = quadrature(QuadratureDomain::Edge, 7).unwrap();
        for p in 0..=7 {
            let q = r.integrate(|x| x[0].powi(p));
            assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn unsupported_degree() {
        let e = quadrature(QuadratureDomain::Triangle, MAX_QUADRATURE_DEGREE + 1).unwrap_err();
        assert!(e.to_string().contains(&MAX_QUADRATURE_DEGREE.to_string()));
    }
}
