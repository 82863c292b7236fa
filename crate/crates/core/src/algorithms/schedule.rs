use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `beta_i = (1 - alpha)^(i - 1)`, with `0^0 = 1` so that `alpha = 1` gives
/// one round of pure expert data followed by pure learner data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub alpha: f64,
}

impl BetaSchedule {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Mixing probability of round `i`, 1-based.
    pub fn beta(&self, i: usize) -> f64 {
        assert!(i >= 1, "rounds are numbered from 1");
        // powi(0) is exactly 1, including for a zero base.
        (1.0 - self.alpha).powi((i - 1) as i32)
    }

    pub fn betas(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.beta(i)).collect()
    }

    /// Largest `n' <= n` with `beta_{n'} > 1/T`, or 0 if there is none.
    pub fn n_beta(&self, n: usize, horizon: usize) -> usize {
        let thresh = 1.0 / horizon as f64;
        (1..=n).take_while(|&i| self.beta(i) > thresh).count()
    }

    /// `sum_{i = n_beta + 1}^{n} beta_i`.
    pub fn tail_sum(&self, n: usize, horizon: usize) -> f64 {
        (self.n_beta(n, horizon) + 1..=n).map(|i| self.beta(i)).sum()
    }

    /// `(2 T q_max / N) [n_beta + T sum_{i > n_beta} beta_i]`.
    pub fn remainder(&self, n: usize, horizon: usize, q_max: f64) -> f64 {
        let t = horizon as f64;
        2.0 * t * q_max / n as f64 * (self.n_beta(n, horizon) as f64 + t * self.tail_sum(n, horizon))
    }
}
