use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const RUN_SCHEMA: &str = "ctglab.run/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Aggrevate,
    Nrpi,
    DaggerClassification,
    BehaviorCloning,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Aggrevate => "aggrevate",
            Algorithm::Nrpi => "nrpi",
            Algorithm::DaggerClassification => "dagger_classification",
            Algorithm::BehaviorCloning => "behavior_cloning",
        }
    }
}

/// What happened in one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationRecord {
    /// 1-based round number.
    pub iteration: usize,
    /// Expert mixing probability, for loops that mix.
    pub beta: Option<f64>,
    /// Class member played this round, for finite-class learners.
    pub chosen_member: Option<usize>,
    /// Empirical loss of the played policy on this round's batch.
    pub round_loss: f64,
    /// Exact value of the played policy, when the oracle is on.
    pub exact_j: Option<f64>,
    /// Exponential weights before this round's update.
    pub weights: Option<Vec<f64>>,
    pub examples: usize,
}

/// Left and right side of one inequality, with the pieces of the right side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub components: BTreeMap<String, f64>,
}

impl BoundCheck {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub hedge_eta: Option<f64>,
    /// Exact value of the uniform trajectory mixture of the played policies.
    pub j_mixture: Option<f64>,
    /// Exact value of the policy trained after the last round.
    pub j_final: Option<f64>,
    /// Index into `[played..., final]` of the validation winner.
    pub best_index: usize,
    /// Validation score of every candidate (exact or Monte-Carlo).
    pub validation_scores: Vec<f64>,
    pub j_best: Option<f64>,
    pub j_expert: Option<f64>,
    /// Average empirical online regret against the best fixed class member.
    pub empirical_eps_regret: Option<f64>,
    pub bounds: Vec<BoundCheck>,
}

/// Everything a run emits besides the policies themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: String,
    pub algorithm: Algorithm,
    pub learner: String,
    pub iterations: Vec<IterationRecord>,
    pub summary: RunSummary,
}
