use crate::algorithms::learner::{LearnerState, RoundExample};
use crate::algorithms::{
    select_best_on_validation, Algorithm, BetaSchedule, IterationRecord, LearnerConfig, RunParams, RunReport,
    RunSummary, RUN_SCHEMA,
};
use crate::error::{Error, Result};
use crate::learners::{
    fit_least_squares, regret_terms, zero_one_loss, AggregatedDataset, FeatureMap, FinitePolicyClass,
};
use crate::learners::class::argmin_by;
use crate::mdp::{policy_value, MdpSpec, Policy};
use crate::sampling::{
    collect_aggrevate_batch, collect_classification_batch, collect_nrpi_batch, ClassificationExample,
    CostToGoExample, Exploration, Purpose,
};

/// Result of an outer loop: the report plus every policy and example it produced.
#[derive(Clone, Debug)]
pub struct RunOutcome<E> {
    pub report: RunReport,
    /// `pi_1..pi_N`, the policies whose data was collected.
    pub played: Vec<Policy>,
    /// Policy trained after the last round.
    pub final_policy: Policy,
    /// Validation winner among `played` and `final_policy`.
    pub best: Policy,
    pub dataset: AggregatedDataset<E>,
    /// `member_losses[i][k]`: empirical loss of class member `k` on round `i`.
    pub member_losses: Vec<Vec<f64>>,
    /// Mixing probabilities per round, for loops that mix in the expert.
    pub betas: Vec<f64>,
    pub feature_map: Option<FeatureMap>,
}

impl<E> RunOutcome<E> {
    /// Uniform trajectory-level mixture of the played policies.
    pub fn mixture(&self) -> Policy {
        Policy::trajectory_mixture(self.played.clone())
    }

    pub fn round_losses(&self) -> Vec<f64> {
        self.report.iterations.iter().map(|r| r.round_loss).collect()
    }

    /// Played policies followed by the final one, in validation order.
    pub fn candidates(&self) -> Vec<Policy> {
        let mut c = self.played.clone();
        c.push(self.final_policy.clone());
        c
    }
}

struct Driver<'a> {
    spec: &'a MdpSpec,
    algorithm: Algorithm,
    cfg: &'a LearnerConfig,
    class: Option<&'a FinitePolicyClass>,
    params: &'a RunParams,
    expert: Option<&'a Policy>,
}

impl Driver<'_> {
    fn run<E: RoundExample>(
        &self,
        initial: Option<Policy>,
        beta_of: impl Fn(usize) -> Option<f64>,
        mut collect: impl FnMut(usize, &Policy) -> Result<Vec<E>>,
    ) -> Result<RunOutcome<E>> {
        let (spec, params) = (self.spec, self.params);
        spec.ensure_valid()?;
        if params.iterations == 0 || params.samples_per_iteration == 0 {
            return Err(Error::Config("iterations and samples per iteration must be positive".into()));
        }
        let mut state = LearnerState::new(self.cfg, self.class, spec, params.iterations, E::loss_range(spec))?;
        let (mut pi, mut member) = match initial {
            Some(p) => {
                p.check_dims(spec)?;
                (p, None)
            }
            None => state.initial_policy(params.initial_member)?,
        };

        let mut records = Vec::with_capacity(params.iterations);
        let mut played = Vec::with_capacity(params.iterations);
        let mut dataset = AggregatedDataset::new();
        let mut member_losses = Vec::new();
        for i in 1..=params.iterations {
            let weights = state.weights();
            let batch = collect(i, &pi)?;
            let obs = state.observe(&batch, &pi, spec.num_actions)?;
            let exact_j = if params.oracle { Some(policy_value(spec, &pi)?) } else { None };
            records.push(IterationRecord {
                iteration: i,
                beta: beta_of(i),
                chosen_member: member,
                round_loss: obs.round_loss,
                exact_j,
                weights,
                examples: batch.len(),
            });
            if let Some(l) = obs.member_losses {
                member_losses.push(l);
            }
            dataset.push_round(batch);
            played.push(pi);
            (pi, member) = state.next_policy(i + 1, params.seed)?;
        }

        let mut candidates = played.clone();
        candidates.push(pi.clone());
        let (best_index, validation_scores) =
            select_best_on_validation(&candidates, spec, params.validation, params.seed)?;
        let round_losses: Vec<f64> = records.iter().map(|r| r.round_loss).collect();
        let empirical_eps_regret = if member_losses.is_empty() {
            None
        } else {
            Some(regret_terms(&round_losses, &member_losses)?.eps_regret)
        };
        let oracle = |p: &Policy| -> Result<Option<f64>> {
            if params.oracle {
                policy_value(spec, p).map(Some)
            } else {
                Ok(None)
            }
        };
        let summary = RunSummary {
            iterations: params.iterations,
            samples_per_iteration: params.samples_per_iteration,
            hedge_eta: state.hedge_eta(),
            j_mixture: oracle(&Policy::trajectory_mixture(played.clone()))?,
            j_final: oracle(&pi)?,
            best_index,
            validation_scores,
            j_best: oracle(&candidates[best_index])?,
            j_expert: self.expert.map(oracle).transpose()?.flatten(),
            empirical_eps_regret,
            bounds: Vec::new(),
        };
        let betas = records.iter().filter_map(|r| r.beta).collect();
        Ok(RunOutcome {
            report: RunReport {
                schema: RUN_SCHEMA.into(),
                algorithm: self.algorithm,
                learner: self.cfg.name().into(),
                iterations: records,
                summary,
            },
            best: candidates.swap_remove(best_index),
            played,
            final_policy: pi,
            dataset,
            member_losses,
            betas,
            feature_map: state.feature_map(),
        })
    }
}

/// Imitation with expert cost-to-go.
///
/// Round `i` rolls in with the per-step mixture of the current policy and the
/// expert (mixing probability `beta_i`), explores one uniform action at a
/// uniform step, records the expert's cost-to-go after it, and hands the
/// aggregated data to the learner.
pub fn run_aggrevate(
    spec: &MdpSpec,
    expert: &Policy,
    class: Option<&FinitePolicyClass>,
    cfg: &LearnerConfig,
    schedule: BetaSchedule,
    params: &RunParams,
) -> Result<RunOutcome<CostToGoExample>> {
    expert.check_dims(spec)?;
    let driver = Driver {
        spec,
        algorithm: Algorithm::Aggrevate,
        cfg,
        class,
        params,
        expert: Some(expert),
    };
    driver.run(
        None,
        |i| Some(schedule.beta(i)),
        |i, pi| {
            collect_aggrevate_batch(
                spec,
                pi,
                expert,
                schedule.beta(i),
                params.samples_per_iteration,
                params.seed,
                i,
            )
        },
    )
}

/// No-regret policy iteration.
///
/// Round `i` draws states from the fixed exploration distributions, explores
/// one uniform action, and records the current policy's own cost-to-go.
/// The first policy defaults to uniform random.
pub fn run_nrpi(
    spec: &MdpSpec,
    exploration: &Exploration,
    class: Option<&FinitePolicyClass>,
    cfg: &LearnerConfig,
    initial: Option<Policy>,
    params: &RunParams,
) -> Result<RunOutcome<CostToGoExample>> {
    let initial = initial.unwrap_or_else(|| Policy::uniform_random(spec.num_states, spec.num_actions, spec.horizon));
    let driver = Driver {
        spec,
        algorithm: Algorithm::Nrpi,
        cfg,
        class,
        params,
        expert: None,
    };
    driver.run(
        Some(initial),
        |_| None,
        |i, pi| collect_nrpi_batch(spec, pi, exploration, params.samples_per_iteration, params.seed, i),
    )
}

/// Same loop shape and sample budget as [`run_aggrevate`], but each example
/// is a visited state labelled with the expert's action and the learner
/// minimizes misclassification.
pub fn dagger_classification(
    spec: &MdpSpec,
    expert: &Policy,
    class: Option<&FinitePolicyClass>,
    cfg: &LearnerConfig,
    schedule: BetaSchedule,
    params: &RunParams,
) -> Result<RunOutcome<ClassificationExample>> {
    expert.check_dims(spec)?;
    let driver = Driver {
        spec,
        algorithm: Algorithm::DaggerClassification,
        cfg,
        class,
        params,
        expert: Some(expert),
    };
    driver.run(
        None,
        |i| Some(schedule.beta(i)),
        |i, pi| {
            collect_classification_batch(
                spec,
                pi,
                expert,
                schedule.beta(i),
                params.samples_per_iteration,
                params.seed,
                Purpose::Collect,
                i,
            )
        },
    )
}

/// Supervised imitation on the expert's own state distribution.
///
/// Draws `iterations * samples_per_iteration` labelled states in a single
/// batch and fits once: the 0-1 minimizer over a finite class (`Ftl`), or
/// the greedy policy of a least-squares fit to action-mismatch indicators
/// (`BatchRegression`). Reported as one round with `beta = 1`.
pub fn behavior_cloning(
    spec: &MdpSpec,
    expert: &Policy,
    class: Option<&FinitePolicyClass>,
    cfg: &LearnerConfig,
    params: &RunParams,
) -> Result<RunOutcome<ClassificationExample>> {
    spec.ensure_valid()?;
    expert.check_dims(spec)?;
    let budget = params.iterations * params.samples_per_iteration;
    if budget == 0 {
        return Err(Error::Config("behavior cloning needs a positive sample budget".into()));
    }
    let batch =
        collect_classification_batch(spec, expert, expert, 1.0, budget, params.seed, Purpose::Baseline, 0)?;
    let (policy, member) = match *cfg {
        LearnerConfig::Ftl => {
            let class = class.ok_or(Error::Empty("policy class"))?;
            class.check_dims(spec)?;
            let losses = class
                .members
                .iter()
                .map(|m| zero_one_loss(&batch, m))
                .collect::<Result<Vec<_>>>()?;
            let k = argmin_by(losses.len(), |i| losses[i]);
            (class.member(k).clone(), Some(k))
        }
        LearnerConfig::BatchRegression { ridge, features } => {
            let fm = features.build(spec.num_states, spec.num_actions, spec.horizon);
            let targets = ClassificationExample::regression_targets(&batch, spec.num_actions);
            (Policy::LinearArgmin(fit_least_squares(&targets, fm, ridge)?), None)
        }
        _ => {
            return Err(Error::Incompatible(format!(
                "behavior cloning is a single batch fit; learner {} is online-only",
                cfg.name()
            )))
        }
    };
    let round_loss = zero_one_loss(&batch, &policy)?;
    let exact_j = if params.oracle { Some(policy_value(spec, &policy)?) } else { None };
    let j_expert = if params.oracle { Some(policy_value(spec, expert)?) } else { None };
    let (_, validation_scores) =
        select_best_on_validation(std::slice::from_ref(&policy), spec, params.validation, params.seed)?;
    let mut dataset = AggregatedDataset::new();
    dataset.push_round(batch);
    Ok(RunOutcome {
        report: RunReport {
            schema: RUN_SCHEMA.into(),
            algorithm: Algorithm::BehaviorCloning,
            learner: cfg.name().into(),
            iterations: vec![IterationRecord {
                iteration: 1,
                beta: Some(1.0),
                chosen_member: member,
                round_loss,
                exact_j,
                weights: None,
                examples: budget,
            }],
            summary: RunSummary {
                iterations: 1,
                samples_per_iteration: budget,
                hedge_eta: None,
                j_mixture: exact_j,
                j_final: exact_j,
                best_index: 0,
                validation_scores,
                j_best: exact_j,
                j_expert,
                empirical_eps_regret: None,
                bounds: Vec::new(),
            },
        },
        played: vec![policy.clone()],
        final_policy: policy.clone(),
        best: policy,
        dataset,
        member_losses: Vec::new(),
        betas: vec![1.0],
        feature_map: None,
    })
}
