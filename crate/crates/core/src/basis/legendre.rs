/// Legendre polynomial `L_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Legendre basis `L_0, ..., L_k` on the reference interval `[-1, 1]`,
/// used for the time direction of every slab. Time-level traces are
/// `u(t_{n+1}^-) = sum_m c_m` and `u(t_n^+) = sum_m (-1)^m c_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegendreBasis {
    pub degree: usize,
}

impl LegendreBasis {
    pub fn new(degree: usize) -> Self {
        LegendreBasis { degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.values_into(s, &mut out, None);
        out
    }

    pub fn derivatives(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let mut d = vec![0.0; self.dim()];
        self.values_into(s, &mut v, Some(&mut d));
        d
    }

    pub fn values_into(&self, s: f64, values: &mut [f64], derivs: Option<&mut [f64]>) {
        values[0] = 1.0;
        if self.degree >= 1 {
            values[1] = s;
        }
        for k in 1..self.degree {
            let kf = k as f64;
            values[k + 1] = ((2.0 * kf + 1.0) * s * values[k] - kf * values[k - 1]) / (kf + 1.0);
        }
        if let Some(d) = derivs {
            d[0] = 0.0;
            if self.degree >= 1 {
                d[1] = 1.0;
            }
            for k in 1..self.degree {
                d[k + 1] = d[k - 1] + (2.0 * k as f64 + 1.0) * values[k];
            }
        }
    }

    /// `L_m(-1) = (-1)^m`.
    pub fn left_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect()
    }

    /// `L_m(1) = 1`.
    pub fn right_values(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }

    /// `int_{-1}^{1} L_m^2 = 2 / (2m + 1)`.
    pub fn norm_squared(&self, m: usize) -> f64 {
        2.0 / (2.0 * m as f64 + 1.0)
    }

    /// Matrix `D` with `L_m' = sum_j D[m][j] L_j`.
    pub fn derivative_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (m, row) in d.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate().take(m) {
                if (m - j) % 2 == 1 {
                    *entry = 2.0 * j as f64 + 1.0;
                }
            }
        }
        d
    }
}

/// Orthonormal Legendre basis on the unit edge `[0, 1]`:
/// `l_i(s) = sqrt(2i + 1) L_i(2s - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetBasis {
    pub degree: usize,
}

impl FacetBasis {
    pub fn new(degree: usize) -> Self {
        FacetBasis { degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values_into(&self, s: f64, out: &mut [f64]) {
        LegendreBasis::new(self.degree).values_into(2.0 * s - 1.0, out, None);
        for (i, v) in out.iter_mut().enumerate() {
            *v *= (2.0 * i as f64 + 1.0).sqrt();
        }
    }

    pub fn values(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.values_into(s, &mut out);
        out
    }
}
