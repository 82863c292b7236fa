use serde::{Deserialize, Serialize};

use crate::learners::FeatureMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// One-hot `(s, a)` plus one-hot `t`.
    #[default]
    StateActionPlusTime,
    /// One-hot `(s, a, t)`.
    StateActionTime,
}

impl FeatureKind {
    pub fn build(self, num_states: usize, num_actions: usize, horizon: usize) -> FeatureMap {
        match self {
            FeatureKind::StateActionPlusTime => FeatureMap::state_action_plus_time(num_states, num_actions, horizon),
            FeatureKind::StateActionTime => FeatureMap::state_action_time(num_states, num_actions, horizon),
        }
    }
}

/// How the next policy is produced from the data seen so far.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerConfig {
    /// Best member of a finite class on all data so far.
    Ftl,
    /// Exponential weights over a finite class; one member sampled per round.
    /// `eta = None` picks `sqrt(8 ln K / N) / loss_range`.
    Hedge { eta: Option<f64> },
    /// One gradient step per round on the round's squared loss.
    OgdRegression { step_size: f64, features: FeatureKind },
    /// Least-squares refit on all data so far (minimum-norm when `ridge == 0`).
    BatchRegression { ridge: f64, features: FeatureKind },
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Ftl => "ftl",
            LearnerConfig::Hedge { .. } => "hedge",
            LearnerConfig::OgdRegression { .. } => "ogd_regression",
            LearnerConfig::BatchRegression { .. } => "batch_regression",
        }
    }

    pub fn uses_class(&self) -> bool {
        matches!(self, LearnerConfig::Ftl | LearnerConfig::Hedge { .. })
    }

    pub fn is_regression(&self) -> bool {
        !self.uses_class()
    }
}

/// How "best on validation" is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValidationMode {
    /// Exact policy value.
    Oracle,
    /// Mean return over `budget` sampled trajectories per policy.
    MonteCarlo { budget: usize },
}

/// Knobs shared by every outer loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub seed: u64,
    /// Record exact policy values alongside the run.
    pub oracle: bool,
    pub validation: ValidationMode,
    /// Class member played in round 1 by finite-class learners.
    pub initial_member: usize,
}

impl RunParams {
    pub fn new(iterations: usize, samples_per_iteration: usize, seed: u64) -> Self {
        Self {
            iterations,
            samples_per_iteration,
            seed,
            oracle: true,
            validation: ValidationMode::Oracle,
            initial_member: 0,
        }
    }
}
