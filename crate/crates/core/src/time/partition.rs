use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `0 = t⁰ < t¹ < … < tᴺ = T`. Slab `n` (0-based) is `(tⁿ, tⁿ⁺¹]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePartition {
    endpoints: Vec<f64>,
    theta: f64,
}

impl TimePartition {
    pub fn uniform(final_time: f64, n_slabs: usize) -> Result<Self> {
        if n_slabs == 0 {
            return Err(Error::invalid("time partition needs at least one slab"));
        }
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::invalid(format!("final time must be positive (got {final_time})")));
        }
        let tau = final_time / n_slabs as f64;
        let endpoints = (0..=n_slabs)
            .map(|i| if i == n_slabs { final_time } else { i as f64 * tau })
            .collect();
        Self::from_endpoints(endpoints)
    }

    pub fn from_endpoints(endpoints: Vec<f64>) -> Result<Self> {
        if endpoints.len() < 2 {
            return Err(Error::invalid("time partition needs at least two endpoints"));
        }
        if endpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("time partition"));
        }
        if endpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("time endpoints must be strictly increasing"));
        }
        let taus = endpoints.windows(2).map(|w| w[1] - w[0]);
        let (lo, hi) = taus.fold((f64::INFINITY, 0.0f64), |(lo, hi), t| (lo.min(t), hi.max(t)));
        Ok(Self {
            endpoints,
            theta: lo / hi,
        })
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn n_slabs(&self) -> usize {
        self.endpoints.len() - 1
    }

    pub fn start(&self, n: usize) -> f64 {
        self.endpoints[n]
    }

    pub fn end(&self, n: usize) -> f64 {
        self.endpoints[n + 1]
    }

    pub fn tau(&self, n: usize) -> f64 {
        self.endpoints[n + 1] - self.endpoints[n]
    }

    pub fn max_tau(&self) -> f64 {
        (0..self.n_slabs()).map(|n| self.tau(n)).fold(0.0, f64::max)
    }

    /// `min τ_n / max τ_n`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn initial_time(&self) -> f64 {
        self.endpoints[0]
    }

    pub fn final_time(&self) -> f64 {
        *self.endpoints.last().expect("non-empty")
    }

    /// Slab containing `t` (left-continuous convention: `tⁿ` belongs to slab `n - 1`).
    pub fn locate(&self, t: f64) -> usize {
        let n = self.n_slabs();
        match self.endpoints[1..].iter().position(|&e| t <= e) {
            Some(i) => i,
            None => n - 1,
        }
    }

    /// Uniformly halve every slab.
    pub fn refine(&self) -> Self {
        let mut e = Vec::with_capacity(2 * self.endpoints.len() - 1);
        for w in self.endpoints.windows(2) {
            e.push(w[0]);
            e.push(0.5 * (w[0] + w[1]));
        }
        e.push(self.final_time());
        Self::from_endpoints(e).expect("refinement keeps ordering")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_partition() {
        let p = TimePartition::uniform(1.0, 4).unwrap();
        assert_eq!(p.endpoints(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.theta(), 1.0);
        assert_eq!(p.tau(2), 0.25);
        assert_eq!(p.locate(0.25), 0);
        assert_eq!(p.locate(0.26), 1);
        assert_eq!(p.locate(1.0), 3);
    }

    #[test]
    fn theta_matches_definition() {
        let p = TimePartition::from_endpoints(vec![0.0, 0.1, 0.4, 0.5]).unwrap();
        let taus = [0.1, 0.30000000000000004, 0.09999999999999998];
        let lo = taus.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = taus.iter().cloned().fold(0.0, f64::max);
        assert_eq!(p.theta(), lo / hi);
        assert!(p.theta() > 0.0 && p.theta() <= 1.0);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(TimePartition::uniform(1.0, 0).is_err());
        assert!(TimePartition::uniform(-1.0, 3).is_err());
        assert!(TimePartition::from_endpoints(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimePartition::from_endpoints(vec![0.0]).is_err());
    }
}
