use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, BetaSchedule, FeatureKind, LearnerConfig, RunParams, ValidationMode};
use crate::envs::{make_cliff_corridor, make_random_mdp, make_two_road, CliffParams, Environment, RandomMdpParams};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConfig {
    CliffCorridor(CliffParams),
    TwoRoad { horizon: usize },
    Random(RandomMdpParams),
}

impl EnvConfig {
    pub fn build(&self) -> Result<Environment> {
        match self {
            EnvConfig::CliffCorridor(p) => make_cliff_corridor(p),
            EnvConfig::TwoRoad { horizon } => make_two_road(*horizon),
            EnvConfig::Random(p) => make_random_mdp(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ftl,
    Hedge,
    OgdRegression,
    BatchRegression,
}

/// Exploration distributions for policy iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplorationKind {
    /// `nu_t` = exact state distribution of the comparator.
    #[default]
    ComparatorDistribution,
    /// States reached by actually running the comparator.
    ComparatorRollout,
    /// `nu_t` = exact state distribution of the expert.
    ExpertDistribution,
    /// `nu_t` uniform over all states.
    UniformStates,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_step_size() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_validation_budget() -> usize {
    1000
}

/// One experiment, as read from a TOML file. Unknown fields are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub algorithm: Algorithm,
    pub learner: LearnerKind,
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Hedge learning rate; derived from the round count when absent.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_true")]
    pub oracle_mode: bool,
    #[serde(default)]
    pub features: FeatureKind,
    #[serde(default)]
    pub initial_member: usize,
    /// Drop the expert from the environment's policy class.
    #[serde(default)]
    pub exclude_expert: bool,
    /// Trajectories per candidate for Monte-Carlo validation (oracle off).
    #[serde(default = "default_validation_budget")]
    pub validation_budget: usize,
    #[serde(default)]
    pub exploration: ExplorationKind,
    /// Class member the policy-iteration bound compares against; defaults to
    /// the member with the lowest exact value.
    #[serde(default)]
    pub comparator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Field-level checks that the type system does not cover.
    pub fn check(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("field `{field}`: {msg}")));
        if self.iterations == 0 {
            return bad("iterations", "must be positive".into());
        }
        if self.samples_per_iteration == 0 {
            return bad("samples_per_iteration", "must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta", format!("must lie in (0, 1], got {}", self.delta));
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return bad("eta", format!("must be positive, got {eta}"));
            }
        }
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return bad("step_size", format!("must be nonnegative, got {}", self.step_size));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return bad("ridge", format!("must be nonnegative, got {}", self.ridge));
        }
        if !self.oracle_mode && self.validation_budget == 0 {
            return bad("validation_budget", "must be positive when the oracle is off".into());
        }
        self.check_compatibility()
    }

    /// Learner/algorithm pairings that cannot run.
    pub fn check_compatibility(&self) -> Result<()> {
        let online_only = matches!(self.learner, LearnerKind::Hedge | LearnerKind::OgdRegression);
        if self.algorithm == Algorithm::BehaviorCloning && online_only {
            return Err(Error::Incompatible(format!(
                "behavior_cloning fits one batch; learner {:?} is an online learner",
                self.learner
            )));
        }
        if self.comparator.is_some() && self.algorithm != Algorithm::Nrpi {
            return Err(Error::Incompatible("`comparator` only applies to nrpi".into()));
        }
        Ok(())
    }

    pub fn learner_config(&self) -> LearnerConfig {
        match self.learner {
            LearnerKind::Ftl => LearnerConfig::Ftl,
            LearnerKind::Hedge => LearnerConfig::Hedge { eta: self.eta },
            LearnerKind::OgdRegression => LearnerConfig::OgdRegression {
                step_size: self.step_size,
                features: self.features,
            },
            LearnerKind::BatchRegression => LearnerConfig::BatchRegression {
                ridge: self.ridge,
                features: self.features,
            },
        }
    }

    pub fn schedule(&self) -> Result<BetaSchedule> {
        BetaSchedule::new(self.alpha)
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            iterations: self.iterations,
            samples_per_iteration: self.samples_per_iteration,
            seed: self.seed,
            oracle: self.oracle_mode,
            validation: if self.oracle_mode {
                ValidationMode::Oracle
            } else {
                ValidationMode::MonteCarlo {
                    budget: self.validation_budget,
                }
            },
            initial_member: self.initial_member,
        }
    }

    /// The environment with the class this config asks for.
    pub fn environment(&self) -> Result<Environment> {
        let mut env = self.env.build().map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Config(format!("[env]: {msg}")),
            other => other,
        })?;
        if self.exclude_expert {
            let k = env
                .class
                .index_of("expert")
                .ok_or_else(|| Error::Config("`exclude_expert` set but the class has no expert member".into()))?;
            env.class = env.class.without(k)?;
        }
        Ok(env)
    }

    /// Copy without output location, as embedded in reports and hashed by sweeps.
    pub fn canonical(&self) -> Self {
        Self {
            out_dir: None,
            ..self.clone()
        }
    }
}
