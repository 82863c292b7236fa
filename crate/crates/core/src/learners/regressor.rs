use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::Policy;
use crate::sampling::CostToGoExample;

/// Binary features of `(s, a, t)`; every variant sets a fixed number of
/// coordinates to 1 and leaves the rest at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureMap {
    /// One-hot over `(s, a)` concatenated with one-hot over `t`.
    StateActionPlusTime {
        num_states: usize,
        num_actions: usize,
        horizon: usize,
    },
    /// One-hot over the joint cell `(s, a, t)`; represents every tabular Q.
    StateActionTime {
        num_states: usize,
        num_actions: usize,
        horizon: usize,
    },
}

/// Indices of the nonzero (unit) coordinates of one feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveSet {
    idx: [usize; 2],
    len: usize,
}

impl ActiveSet {
    pub fn as_slice(&self) -> &[usize] {
        &self.idx[..self.len]
    }
}

impl FeatureMap {
    pub fn state_action_plus_time(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        FeatureMap::StateActionPlusTime {
            num_states,
            num_actions,
            horizon,
        }
    }

    pub fn state_action_time(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        FeatureMap::StateActionTime {
            num_states,
            num_actions,
            horizon,
        }
    }

    fn dims(&self) -> (usize, usize, usize) {
        match *self {
            FeatureMap::StateActionPlusTime {
                num_states,
                num_actions,
                horizon,
            }
            | FeatureMap::StateActionTime {
                num_states,
                num_actions,
                horizon,
            } => (num_states, num_actions, horizon),
        }
    }

    pub fn num_states(&self) -> usize {
        self.dims().0
    }

    pub fn num_actions(&self) -> usize {
        self.dims().1
    }

    pub fn horizon(&self) -> usize {
        self.dims().2
    }

    pub fn dim(&self) -> usize {
        let (ns, na, horizon) = self.dims();
        match self {
            FeatureMap::StateActionPlusTime { .. } => ns * na + horizon,
            FeatureMap::StateActionTime { .. } => ns * na * horizon,
        }
    }

    /// Nonzero coordinates of `f(s, a, t)`, `t` in `1..=T`.
    #[inline]
    pub fn active(&self, s: usize, a: usize, t: usize) -> ActiveSet {
        let (ns, na, _) = self.dims();
        match self {
            FeatureMap::StateActionPlusTime { .. } => ActiveSet {
                idx: [s * na + a, ns * na + t - 1],
                len: 2,
            },
            FeatureMap::StateActionTime { .. } => ActiveSet {
                idx: [((t - 1) * ns + s) * na + a, 0],
                len: 1,
            },
        }
    }

    /// Dense `f(s, a, t)`.
    pub fn features(&self, s: usize, a: usize, t: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.dim()];
        for &i in self.active(s, a, t).as_slice() {
            f[i] = 1.0;
        }
        f
    }

    pub fn check_example(&self, ex: &CostToGoExample) -> Result<()> {
        let (ns, na, horizon) = self.dims();
        if ex.state >= ns || ex.action >= na || !(1..=horizon).contains(&ex.time) {
            return Err(Error::DimensionMismatch(format!(
                "example (s={}, a={}, t={}) outside a {ns}x{na}x{horizon} feature map",
                ex.state, ex.action, ex.time
            )));
        }
        if !ex.q_estimate.is_finite() {
            return Err(Error::NonFinite(format!("regression target {}", ex.q_estimate)));
        }
        Ok(())
    }
}

/// `Q̂(s, a, t) = w . f(s, a, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearQRegressor {
    pub feature_map: FeatureMap,
    pub weights: Vec<f64>,
}

impl LinearQRegressor {
    pub fn zeros(feature_map: FeatureMap) -> Self {
        Self {
            weights: vec![0.0; feature_map.dim()],
            feature_map,
        }
    }

    pub fn with_weights(feature_map: FeatureMap, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != feature_map.dim() {
            return Err(Error::ShapeMismatch {
                left: feature_map.dim(),
                right: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("regressor weights".into()));
        }
        Ok(Self { feature_map, weights })
    }

    #[inline]
    pub fn predict(&self, s: usize, a: usize, t: usize) -> f64 {
        self.feature_map
            .active(s, a, t)
            .as_slice()
            .iter()
            .map(|&i| self.weights[i])
            .sum()
    }

    /// `argmin_a Q̂(s, a, t)`, lowest index on ties.
    pub fn greedy_action(&self, s: usize, t: usize) -> usize {
        let mut best = 0;
        let mut best_q = f64::INFINITY;
        for a in 0..self.feature_map.num_actions() {
            let q = self.predict(s, a, t);
            if q < best_q {
                best = a;
                best_q = q;
            }
        }
        best
    }

    /// `(1/m) sum_j (Q̂(s_j, a_j, t_j) - q_j)^2`.
    pub fn batch_loss(&self, batch: &[CostToGoExample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Empty("regression batch"));
        }
        let mut total = 0.0;
        for ex in batch {
            self.feature_map.check_example(ex)?;
            let r = self.predict(ex.state, ex.action, ex.time) - ex.q_estimate;
            total += r * r;
        }
        Ok(total / batch.len() as f64)
    }

    /// Gradient of [`Self::batch_loss`]: `(2/m) sum_j (Q̂_j - q_j) f_j`.
    pub fn gradient(&self, batch: &[CostToGoExample]) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::Empty("regression batch"));
        }
        let scale = 2.0 / batch.len() as f64;
        let mut g = vec![0.0; self.weights.len()];
        for ex in batch {
            self.feature_map.check_example(ex)?;
            let r = self.predict(ex.state, ex.action, ex.time) - ex.q_estimate;
            for &i in self.feature_map.active(ex.state, ex.action, ex.time).as_slice() {
                g[i] += scale * r;
            }
        }
        Ok(g)
    }
}

/// One online-gradient step on the batch squared loss.
///
/// Returns the updated regressor and the loss *before* the step, which is the
/// online loss charged to the current hypothesis.
pub fn ogd_regression_update(
    reg: &LinearQRegressor,
    batch: &[CostToGoExample],
    step_size: f64,
) -> Result<(LinearQRegressor, f64)> {
    if !(step_size.is_finite() && step_size >= 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be nonnegative, got {step_size}")));
    }
    let loss = reg.batch_loss(batch)?;
    let g = reg.gradient(batch)?;
    let weights = reg.weights.iter().zip(&g).map(|(w, gi)| w - step_size * gi).collect();
    Ok((
        LinearQRegressor {
            feature_map: reg.feature_map,
            weights,
        },
        loss,
    ))
}

/// The greedy (cost-minimizing) policy of a regressor.
pub fn argmax_policy(reg: &LinearQRegressor) -> Policy {
    Policy::LinearArgmin(reg.clone())
}
