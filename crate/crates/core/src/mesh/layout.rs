use crate::error::{HdgError, Result};

/// Partition `0 = t_0 < t_1 < ... < t_N = T` of the time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeLayout {
    levels: Vec<f64>,
}

/// One time slab `I_n = (t_n, t_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub index: usize,
    pub start: f64,
    pub end: f64,
}

impl Slab {
    pub fn dt(&self) -> f64 {
        self.end - self.start
    }

    /// Physical time of the reference coordinate `s` in `[-1, 1]`.
    pub fn time(&self, s: f64) -> f64 {
        self.start + 0.5 * (s + 1.0) * self.dt()
    }

    /// Reference coordinate of the physical time `t`.
    pub fn reference(&self, t: f64) -> f64 {
        2.0 * (t - self.start) / self.dt() - 1.0
    }

    pub fn contains(&self, t: f64) -> bool {
        let tol = 1e-12 * self.dt().max(self.end.abs());
        t >= self.start - tol && t <= self.end + tol
    }
}

impl SpaceTimeLayout {
    pub fn uniform(final_time: f64, n_slabs: usize) -> Result<Self> {
        if n_slabs == 0 || !(final_time > 0.0) {
            return Err(HdgError::InvalidArgument("need T > 0 and at least one slab".into()));
        }
        let dt = final_time / n_slabs as f64;
        let mut levels: Vec<f64> = (0..n_slabs).map(|n| n as f64 * dt).collect();
        levels.push(final_time);
        Ok(SpaceTimeLayout { levels })
    }

    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 || levels[0] != 0.0 {
            return Err(HdgError::InvalidArgument("time levels must start at 0 and contain a slab".into()));
        }
        if levels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HdgError::InvalidArgument("time levels must be strictly increasing".into()));
        }
        Ok(SpaceTimeLayout { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn n_slabs(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    pub fn slab(&self, n: usize) -> Slab {
        Slab { index: n, start: self.levels[n], end: self.levels[n + 1] }
    }

    pub fn slabs(&self) -> impl Iterator<Item = Slab> + '_ {
        (0..self.n_slabs()).map(|n| self.slab(n))
    }

    /// `tau = max dt_n`.
    pub fn tau(&self) -> f64 {
        self.slabs().map(|s| s.dt()).fold(0.0, f64::max)
    }

    /// Smallest `C` with `tau <= C dt_n` for every slab.
    pub fn quasi_uniformity(&self) -> f64 {
        self.tau() / self.slabs().map(|s| s.dt()).fold(f64::INFINITY, f64::min)
    }

    /// Slab containing `t` (the earlier one at a shared level).
    pub fn find_slab(&self, t: f64) -> Option<Slab> {
        self.slabs().find(|s| s.contains(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_layout() {
        let l = SpaceTimeLayout::uniform(2.0, 8).unwrap();
        assert_eq!(l.n_slabs(), 8);
        assert_eq!(l.levels()[0], 0.0);
        assert_eq!(l.final_time(), 2.0);
        assert!((l.tau() - 0.25).abs() < 1e-15);
        assert!((l.quasi_uniformity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graded_layout_ratio() {
        let l = SpaceTimeLayout::from_levels(vec![0.0, 0.1, 0.3, 0.6]).unwrap();
        assert!((l.quasi_uniformity() - 3.0).abs() < 1e-12);
        for s in l.slabs() {
            assert!(l.tau() <= l.quasi_uniformity() * s.dt() + 1e-15);
        }
    }

    #[test]
    fn invalid_layouts() {
        assert!(SpaceTimeLayout::from_levels(vec![0.0, 0.5, 0.5]).is_err());
        assert!(SpaceTimeLayout::from_levels(vec![0.1, 0.5]).is_err());
        assert!(SpaceTimeLayout::uniform(1.0, 0).is_err());
    }

    #[test]
    fn reference_time_round_trip() {
        let s = Slab { index: 0, start: 0.25, end: 0.75 };
        assert!((s.time(s.reference(0.4)) - 0.4).abs() < 1e-15);
        assert_eq!(s.time(-1.0), 0.25);
        assert_eq!(s.time(1.0), 0.75);
    }
}
