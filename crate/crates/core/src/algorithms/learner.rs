use rayon::prelude::*;

use crate::algorithms::LearnerConfig;
use crate::error::{Error, Result};
use crate::learners::{
    argmax_policy, default_hedge_eta, empirical_cs_loss, hedge_update, ogd_regression_update,
    zero_one_loss, FeatureMap, FinitePolicyClass, LeastSquaresAccumulator, LinearQRegressor,
};
use crate::mdp::{MdpSpec, Policy};
use crate::learners::class::argmin_by;
use crate::sampling::{sample_categorical, ClassificationExample, CostToGoExample, Purpose, RngStream, StreamKey};

/// Example types an outer loop can learn from.
pub trait RoundExample: Copy + Send + Sync {
    /// Empirical loss of `pi` on one batch.
    fn loss(batch: &[Self], pi: &Policy) -> Result<f64>;
    /// Range of a per-round loss, used to scale the default Hedge rate.
    fn loss_range(spec: &MdpSpec) -> f64;
    /// Regression targets derived from one batch.
    fn regression_targets(batch: &[Self], num_actions: usize) -> Vec<CostToGoExample>;
}

impl RoundExample for CostToGoExample {
    fn loss(batch: &[Self], pi: &Policy) -> Result<f64> {
        empirical_cs_loss(batch, pi)
    }

    fn loss_range(spec: &MdpSpec) -> f64 {
        spec.cost_to_go_cap()
    }

    fn regression_targets(batch: &[Self], _: usize) -> Vec<CostToGoExample> {
        batch.to_vec()
    }
}

impl RoundExample for ClassificationExample {
    fn loss(batch: &[Self], pi: &Policy) -> Result<f64> {
        zero_one_loss(batch, pi)
    }

    fn loss_range(_: &MdpSpec) -> f64 {
        1.0
    }

    /// Full-information indicator costs: 0 for the expert's action, 1 otherwise.
    fn regression_targets(batch: &[Self], num_actions: usize) -> Vec<CostToGoExample> {
        batch
            .iter()
            .flat_map(|ex| {
                (0..num_actions).map(move |a| CostToGoExample {
                    state: ex.state,
                    time: ex.time,
                    action: a,
                    q_estimate: if a == ex.expert_action { 0.0 } else { 1.0 },
                })
            })
            .collect()
    }
}

enum Rule {
    Ftl,
    Hedge { eta: f64 },
    Ogd { step_size: f64 },
    Batch { ridge: f64, acc: LeastSquaresAccumulator },
}

/// Sequential learner state shared by all outer loops.
pub(crate) struct LearnerState<'a> {
    class: Option<&'a FinitePolicyClass>,
    rule: Rule,
    /// Per-member loss totals over all records seen so far.
    totals: Vec<f64>,
    records: usize,
    weights: Vec<f64>,
    reg: Option<LinearQRegressor>,
}

pub(crate) struct RoundObservation {
    pub round_loss: f64,
    pub member_losses: Option<Vec<f64>>,
}

impl<'a> LearnerState<'a> {
    pub fn new(
        cfg: &LearnerConfig,
        class: Option<&'a FinitePolicyClass>,
        spec: &MdpSpec,
        rounds: usize,
        loss_range: f64,
    ) -> Result<Self> {
        let rule = match *cfg {
            LearnerConfig::Ftl => Rule::Ftl,
            LearnerConfig::Hedge { eta } => {
                let k = class.map_or(0, FinitePolicyClass::len);
                let eta = eta.unwrap_or_else(|| default_hedge_eta(k, rounds, loss_range));
                if !(eta.is_finite() && eta > 0.0) {
                    return Err(Error::Config(format!("hedge eta must be positive, got {eta}")));
                }
                Rule::Hedge { eta }
            }
            LearnerConfig::OgdRegression { step_size, .. } => {
                if !(step_size.is_finite() && step_size >= 0.0) {
                    return Err(Error::Config(format!("step size must be nonnegative, got {step_size}")));
                }
                Rule::Ogd { step_size }
            }
            LearnerConfig::BatchRegression { ridge, features } => {
                if !(ridge.is_finite() && ridge >= 0.0) {
                    return Err(Error::Config(format!("ridge must be nonnegative, got {ridge}")));
                }
                let fm = features.build(spec.num_states, spec.num_actions, spec.horizon);
                Rule::Batch {
                    ridge,
                    acc: LeastSquaresAccumulator::new(fm),
                }
            }
        };
        let (class, reg) = if cfg.uses_class() {
            let class = class.ok_or_else(|| {
                Error::Incompatible(format!("learner {} needs a finite policy class", cfg.name()))
            })?;
            class.check_dims(spec)?;
            (Some(class), None)
        } else {
            let fm = match *cfg {
                LearnerConfig::OgdRegression { features, .. } | LearnerConfig::BatchRegression { features, .. } => {
                    features.build(spec.num_states, spec.num_actions, spec.horizon)
                }
                _ => unreachable!(),
            };
            (None, Some(LinearQRegressor::zeros(fm)))
        };
        let k = class.map_or(0, FinitePolicyClass::len);
        Ok(Self {
            class,
            rule,
            totals: vec![0.0; k],
            records: 0,
            weights: class.map(|c| c.weights.clone()).unwrap_or_default(),
            reg,
        })
    }

    pub fn hedge_eta(&self) -> Option<f64> {
        match self.rule {
            Rule::Hedge { eta } => Some(eta),
            _ => None,
        }
    }

    pub fn weights(&self) -> Option<Vec<f64>> {
        matches!(self.rule, Rule::Hedge { .. }).then(|| self.weights.clone())
    }

    pub fn feature_map(&self) -> Option<FeatureMap> {
        self.reg.as_ref().map(|r| r.feature_map)
    }

    /// Policy used before any data has been seen.
    pub fn initial_policy(&self, initial_member: usize) -> Result<(Policy, Option<usize>)> {
        match (self.class, &self.reg) {
            (Some(class), _) => {
                if initial_member >= class.len() {
                    return Err(Error::Config(format!(
                        "initial member {initial_member} outside a class of {}",
                        class.len()
                    )));
                }
                Ok((class.member(initial_member).clone(), Some(initial_member)))
            }
            (None, Some(reg)) => Ok((argmax_policy(reg), None)),
            (None, None) => unreachable!(),
        }
    }

    /// Charges the played policy and every member for one batch, then updates.
    pub fn observe<E: RoundExample>(
        &mut self,
        batch: &[E],
        played: &Policy,
        num_actions: usize,
    ) -> Result<RoundObservation> {
        if let Some(class) = self.class {
            let member_losses = class
                .members
                .par_iter()
                .map(|m| E::loss(batch, m))
                .collect::<Result<Vec<_>>>()?;
            let round_loss = E::loss(batch, played)?;
            for (t, l) in self.totals.iter_mut().zip(&member_losses) {
                *t += l * batch.len() as f64;
            }
            self.records += batch.len();
            if let Rule::Hedge { eta } = self.rule {
                self.weights = hedge_update(&self.weights, &member_losses, eta)?;
            }
            return Ok(RoundObservation {
                round_loss,
                member_losses: Some(member_losses),
            });
        }
        let targets = E::regression_targets(batch, num_actions);
        let reg = self.reg.as_ref().expect("regression learner without a regressor");
        let (next, round_loss) = match &mut self.rule {
            Rule::Ogd { step_size } => ogd_regression_update(reg, &targets, *step_size)?,
            Rule::Batch { ridge, acc } => {
                let loss = reg.batch_loss(&targets)?;
                acc.add(&targets)?;
                (acc.solve(*ridge)?, loss)
            }
            _ => unreachable!(),
        };
        self.reg = Some(next);
        Ok(RoundObservation {
            round_loss,
            member_losses: None,
        })
    }

    /// Policy for the next round (`iteration` is that round's 1-based number).
    pub fn next_policy(&self, iteration: usize, seed: u64) -> Result<(Policy, Option<usize>)> {
        match (&self.rule, self.class) {
            (Rule::Ftl, Some(class)) => {
                if self.records == 0 {
                    return Err(Error::Empty("aggregated dataset"));
                }
                // Totals over all records, so this is the flattened-dataset minimizer.
                let k = argmin_by(class.len(), |i| self.totals[i] / self.records as f64);
                Ok((class.member(k).clone(), Some(k)))
            }
            (Rule::Hedge { .. }, Some(class)) => {
                let mut rng = RngStream::new(seed, StreamKey::new(Purpose::Learner, iteration, 0));
                let k = sample_categorical(&self.weights, &mut rng);
                Ok((class.member(k).clone(), Some(k)))
            }
            _ => Ok((argmax_policy(self.reg.as_ref().expect("regressor")), None)),
        }
    }
}
