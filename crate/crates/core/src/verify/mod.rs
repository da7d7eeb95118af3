//! Verification harness: operator identities, inequality constants,
//! refinement studies, consistency residuals and energy reports.
//!
//! Every suite is deterministic for a fixed seed and level schedule; random
//! fields are drawn coefficient-wise from `[-1, 1]` with boundary facet
//! velocities set to zero.

mod constants;
mod convergence;
mod energy;
mod identities;

pub use constants::{constant_estimates, ConstantLevel, ConstantReport, ConstantStudy};
pub use convergence::{
    consistency_residuals, convergence_metrics, convergence_study, equicontinuity_probe, projection_rates,
    ConvergenceStudy, EquicontinuityPoint, LevelRun, ProjectionStudy, CONSISTENCY_METRICS, CONVERGENCE_METRICS,
    PROJECTION_METRICS,
};
pub use energy::{energy_inequality_report, EnergyReport, EnergySlack};
pub use identities::{identity_suite, identity_suite_grid, IdentityCheck, IdentityReport, IdentityRow};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{HdgError, Result};
use crate::projections::DivProjector;
use crate::spaces::{DiscreteField, FieldRole, SlabSpace, VelocityPair};

/// Least-squares slope of `log e` against `log h`, using the entries with
/// positive finite `e`. `NaN` if fewer than two remain.
pub fn observed_order(h: &[f64], e: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `true` if every entry is strictly smaller than its predecessor.
pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Final value at most `factor` times the largest earlier value.
pub fn bounded_trend(v: &[f64], factor: f64) -> bool {
    match v.split_last() {
        Some((last, earlier)) if !earlier.is_empty() => {
            let max = earlier.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            last.is_finite() && *last <= factor * max
        }
        _ => false,
    }
}

/// Per-level metrics of a joint `(h, tau)` refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy {
    pub metric_names: Vec<String>,
    pub levels: Vec<LevelRecord>,
}

/// One refinement level; `values` is aligned with the study's metric names,
/// `NaN` where a metric is not defined (e.g. the Cauchy increment of the
/// finest level).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub n: usize,
    pub slabs: usize,
    pub h: f64,
    pub tau: f64,
    pub values: Vec<f64>,
}

impl RefinementStudy {
    pub fn new(metric_names: Vec<String>, levels: Vec<LevelRecord>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(HdgError::InvalidArgument(format!("a refinement study needs at least 3 levels, got {}", levels.len())));
        }
        for w in levels.windows(2) {
            if !(w[1].h < w[0].h) || !(w[1].tau < w[0].tau) {
                return Err(HdgError::InvalidArgument("h and tau must decrease strictly across levels".into()));
            }
        }
        if levels.iter().any(|l| l.values.len() != metric_names.len()) {
            return Err(HdgError::InvalidArgument("every level needs one value per metric".into()));
        }
        Ok(RefinementStudy { metric_names, levels })
    }

    pub fn metric(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.metric_names.iter().position(|m| m == name)?;
        Some(self.levels.iter().map(|l| l.values[i]).filter(|v| !v.is_nan()).collect())
    }

    /// Observed order of every metric against `h`.
    pub fn orders(&self) -> Vec<f64> {
        (0..self.metric_names.len())
            .map(|i| {
                let (h, e): (Vec<f64>, Vec<f64>) =
                    self.levels.iter().filter(|l| !l.values[i].is_nan()).map(|l| (l.h, l.values[i])).unzip();
                observed_order(&h, &e)
            })
            .collect()
    }

    pub fn order(&self, name: &str) -> Option<f64> {
        let i = self.metric_names.iter().position(|m| m == name)?;
        Some(self.orders()[i])
    }

    pub fn strictly_decreasing(&self, name: &str) -> bool {
        self.metric(name).is_some_and(|v| v.len() >= 2 && strictly_decreasing(&v))
    }

    /// Header `level,n,slabs,h,tau,<metrics>`, one row per level and a final
    /// `order` row with the fitted slopes.
    pub fn to_csv(&self) -> Result<String> {
        let mut header = vec!["level".to_string(), "n".into(), "slabs".into(), "h".into(), "tau".into()];
        header.extend(self.metric_names.iter().cloned());
        let mut rows: Vec<Vec<String>> = self
            .levels
            .iter()
            .map(|l| {
                let mut r = vec![l.level.to_string(), l.n.to_string(), l.slabs.to_string(), fmt(l.h), fmt(l.tau)];
                r.extend(l.values.iter().map(|&v| fmt(v)));
                r
            })
            .collect();
        let mut order = vec!["order".to_string(), String::new(), String::new(), String::new(), String::new()];
        order.extend(self.orders().iter().map(|&v| fmt(v)));
        rows.push(order);
        write_csv(&header, &rows)
    }
}

/// Number formatting shared by all CSV writers.
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.12e}")
    }
}

/// Serialises a header and rows as CSV text.
pub fn write_csv<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| HdgError::Io(std::io::Error::other(e));
    w.write_record(header.iter().map(|s| s.as_ref())).map_err(to_io)?;
    for r in rows {
        w.write_record(r).map_err(to_io)?;
    }
    let bytes = w.into_inner().map_err(|e| HdgError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| HdgError::Internal(e.to_string()))
}

pub(crate) fn fill_random(field: &mut DiscreteField, rng: &mut ChaCha8Rng) {
    for v in field.coefficients_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
}

/// Random pair with zero facet velocity on boundary faces.
pub(crate) fn random_pair(space: &SlabSpace, rng: &mut ChaCha8Rng) -> VelocityPair {
    let mut pair = space.zero_pair();
    fill_random(&mut pair.element, rng);
    fill_random(&mut pair.facet, rng);
    zero_boundary_facets(space, &mut pair.facet);
    pair
}

pub(crate) fn zero_boundary_facets(space: &SlabSpace, facet: &mut DiscreteField) {
    let (_, nc, nb) = facet.shape();
    for f in (0..space.n_faces()).filter(|&f| space.is_boundary_face(f)) {
        for c in 0..nc {
            for j in 0..nb {
                for m in 0..facet.n_modes() {
                    *facet.coefficient_mut(f, c, j, m) = 0.0;
                }
            }
        }
    }
}

/// Random element velocity in `V_h^div` for each temporal mode.
pub(crate) fn random_solenoidal(
    space: &SlabSpace,
    div: &DivProjector,
    rng: &mut ChaCha8Rng,
) -> Result<DiscreteField> {
    let nt = space.n_modes();
    let single = space.with_temporal_degree(0);
    let mut out = space.zero_field(FieldRole::ElementVelocity);
    for m in 0..nt {
        let mut f = single.zero_field(FieldRole::ElementVelocity);
        fill_random(&mut f, rng);
        let p = div.project_field(&f)?;
        for (b, v) in p.coefficients().iter().enumerate() {
            out.coefficients_mut()[b * nt + m] = *v;
        }
    }
    Ok(out)
}

/// Derives a per-case seed from a base seed.
pub(crate) fn case_seed(seed: u64, case: u64) -> u64 {
    seed ^ case.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|h: &f64| 3.0 * h.powf(2.5)).collect();
        assert!((observed_order(&h, &e) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn trends() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(bounded_trend(&[1.0, 2.0, 2.3], 1.2));
        assert!(!bounded_trend(&[1.0, 2.0, 2.5], 1.2));
        assert!(!bounded_trend(&[1.0, f64::INFINITY], 1.2));
    }

    #[test]
    fn study_needs_three_levels() {
        let rec = |l: usize| LevelRecord { level: l, n: 2 << l, slabs: 2 << l, h: 1.0 / (2 << l) as f64, tau: 0.5 / (1 << l) as f64, values: vec![1.0] };
        assert!(RefinementStudy::new(vec!["e".into()], vec![rec(0), rec(1)]).is_err());
        let s = RefinementStudy::new(vec!["e".into()], vec![rec(0), rec(1), rec(2)]).unwrap();
        let csv = s.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("level,n,slabs,h,tau,e"));
    }
}
