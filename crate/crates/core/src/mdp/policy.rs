use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LinearQRegressor;
use crate::mdp::MdpSpec;

/// Deterministic table: `actions[s][t - 1]` is the action taken in `s` at wall-clock time `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularPolicy {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub actions: Vec<Vec<usize>>,
}

/// Stochastic table: `probs[s][t - 1]` is a distribution over actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticPolicy {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub probs: Vec<Vec<Vec<f64>>>,
}

/// A (possibly non-stationary, possibly randomized) policy over a tabular MDP.
///
/// Time arguments are wall-clock steps `t` in `1..=T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    TabularDeterministic(TabularPolicy),
    TabularStochastic(StochasticPolicy),
    /// At every step, independently, act like `expert` with probability `beta`
    /// and like `base` otherwise.
    PerStepMixture {
        base: Box<Policy>,
        expert: Box<Policy>,
        beta: f64,
    },
    /// Picks one member uniformly at the start of a trajectory and follows it
    /// for the whole trajectory. Not Markov in general.
    TrajectoryUniformMixture { members: Vec<Policy> },
    /// `argmin_a Q(s, a, t)` of a linear regressor, lowest index on ties.
    LinearArgmin(LinearQRegressor),
}

impl TabularPolicy {
    pub fn from_fn(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        mut f: impl FnMut(usize, usize) -> usize,
    ) -> Self {
        let actions = (0..num_states)
            .map(|s| (1..=horizon).map(|t| f(s, t)).collect())
            .collect();
        Self {
            num_states,
            num_actions,
            horizon,
            actions,
        }
    }

    /// Same action at every time step.
    pub fn stationary(per_state: &[usize], num_actions: usize, horizon: usize) -> Self {
        Self::from_fn(per_state.len(), num_actions, horizon, |s, _| per_state[s])
    }

    #[inline]
    pub fn action(&self, s: usize, t: usize) -> usize {
        self.actions[s][t - 1]
    }
}

impl StochasticPolicy {
    pub fn uniform(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        let row = vec![1.0 / num_actions as f64; num_actions];
        Self {
            num_states,
            num_actions,
            horizon,
            probs: vec![vec![row; horizon]; num_states],
        }
    }
}

impl From<TabularPolicy> for Policy {
    fn from(p: TabularPolicy) -> Self {
        Policy::TabularDeterministic(p)
    }
}

impl From<StochasticPolicy> for Policy {
    fn from(p: StochasticPolicy) -> Self {
        Policy::TabularStochastic(p)
    }
}

impl Policy {
    pub fn uniform_random(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        StochasticPolicy::uniform(num_states, num_actions, horizon).into()
    }

    pub fn per_step_mixture(base: Policy, expert: Policy, beta: f64) -> Self {
        Policy::PerStepMixture {
            base: Box::new(base),
            expert: Box::new(expert),
            beta,
        }
    }

    pub fn trajectory_mixture(members: Vec<Policy>) -> Self {
        Policy::TrajectoryUniformMixture { members }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Policy::TabularDeterministic(p) => p.num_actions,
            Policy::TabularStochastic(p) => p.num_actions,
            Policy::PerStepMixture { base, .. } => base.num_actions(),
            Policy::TrajectoryUniformMixture { members } => {
                members.first().map_or(0, Policy::num_actions)
            }
            Policy::LinearArgmin(reg) => reg.feature_map.num_actions(),
        }
    }

    /// False when a trajectory-level mixture appears anywhere in the tree.
    pub fn is_markov(&self) -> bool {
        match self {
            Policy::TrajectoryUniformMixture { .. } => false,
            Policy::PerStepMixture { base, expert, .. } => base.is_markov() && expert.is_markov(),
            _ => true,
        }
    }

    /// Checks that this policy answers queries for every `(s, t)` of `spec`.
    pub fn check_dims(&self, spec: &MdpSpec) -> Result<()> {
        let (ns, na, horizon) = (spec.num_states, spec.num_actions, spec.horizon);
        let mismatch = |what: &str, got: usize, want: usize| {
            Err(Error::DimensionMismatch(format!(
                "policy {what} is {got}, MDP has {want}"
            )))
        };
        match self {
            Policy::TabularDeterministic(p) => {
                if p.num_states != ns {
                    return mismatch("state count", p.num_states, ns);
                }
                if p.num_actions != na {
                    return mismatch("action count", p.num_actions, na);
                }
                if p.horizon != horizon {
                    return mismatch("horizon", p.horizon, horizon);
                }
                if p.actions.len() != ns
                    || p.actions.iter().any(|row| row.len() != horizon)
                    || p.actions.iter().flatten().any(|&a| a >= na)
                {
                    return Err(Error::DimensionMismatch(
                        "tabular policy table is ragged or names an out-of-range action".into(),
                    ));
                }
                Ok(())
            }
            Policy::TabularStochastic(p) => {
                if p.num_states != ns {
                    return mismatch("state count", p.num_states, ns);
                }
                if p.num_actions != na {
                    return mismatch("action count", p.num_actions, na);
                }
                if p.horizon != horizon {
                    return mismatch("horizon", p.horizon, horizon);
                }
                if p.probs.len() != ns
                    || p.probs.iter().any(|row| row.len() != horizon)
                    || p.probs.iter().flatten().any(|d| d.len() != na)
                {
                    return Err(Error::DimensionMismatch(
                        "stochastic policy table is ragged".into(),
                    ));
                }
                Ok(())
            }
            Policy::PerStepMixture { base, expert, beta } => {
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::InvalidArgument(format!(
                        "mixing probability {beta} outside [0, 1]"
                    )));
                }
                base.check_dims(spec)?;
                expert.check_dims(spec)
            }
            Policy::TrajectoryUniformMixture { members } => {
                if members.is_empty() {
                    return Err(Error::Empty("trajectory mixture members"));
                }
                members.iter().try_for_each(|m| m.check_dims(spec))
            }
            Policy::LinearArgmin(reg) => {
                let fm = &reg.feature_map;
                if fm.num_states() != ns {
                    return mismatch("state count", fm.num_states(), ns);
                }
                if fm.num_actions() != na {
                    return mismatch("action count", fm.num_actions(), na);
                }
                if fm.horizon() != horizon {
                    return mismatch("horizon", fm.horizon(), horizon);
                }
                if reg.weights.len() != fm.dim() {
                    return mismatch("weight length", reg.weights.len(), fm.dim());
                }
                Ok(())
            }
        }
    }

    /// Writes `pi(. | s, t)` into `out` (length = number of actions).
    ///
    /// For a trajectory mixture this is the prior average of the members, i.e.
    /// the action distribution before any history has been observed.
    pub fn fill_action_distribution(&self, s: usize, t: usize, out: &mut [f64]) {
        match self {
            Policy::TabularDeterministic(p) => {
                out.fill(0.0);
                out[p.action(s, t)] = 1.0;
            }
            Policy::TabularStochastic(p) => out.copy_from_slice(&p.probs[s][t - 1]),
            Policy::PerStepMixture { base, expert, beta } => {
                base.fill_action_distribution(s, t, out);
                let mut ex = vec![0.0; out.len()];
                expert.fill_action_distribution(s, t, &mut ex);
                for (o, e) in out.iter_mut().zip(&ex) {
                    *o = beta * e + (1.0 - beta) * *o;
                }
            }
            Policy::TrajectoryUniformMixture { members } => {
                out.fill(0.0);
                let mut tmp = vec![0.0; out.len()];
                let w = 1.0 / members.len() as f64;
                for m in members {
                    m.fill_action_distribution(s, t, &mut tmp);
                    for (o, x) in out.iter_mut().zip(&tmp) {
                        *o += w * x;
                    }
                }
            }
            Policy::LinearArgmin(reg) => {
                out.fill(0.0);
                out[reg.greedy_action(s, t)] = 1.0;
            }
        }
    }

    pub fn action_distribution(&self, s: usize, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_actions()];
        self.fill_action_distribution(s, t, &mut out);
        out
    }

    /// The action a deterministic policy takes; `None` for randomized policies.
    pub fn deterministic_action(&self, s: usize, t: usize) -> Option<usize> {
        match self {
            Policy::TabularDeterministic(p) => Some(p.action(s, t)),
            Policy::LinearArgmin(reg) => Some(reg.greedy_action(s, t)),
            Policy::PerStepMixture { base, beta, .. } if *beta == 0.0 => {
                base.deterministic_action(s, t)
            }
            Policy::PerStepMixture { expert, beta, .. } if *beta == 1.0 => {
                expert.deterministic_action(s, t)
            }
            _ => None,
        }
    }

    /// Materializes a deterministic policy as a table over the given dimensions.
    pub fn to_tabular(&self, num_states: usize, horizon: usize) -> Option<TabularPolicy> {
        let mut actions = vec![vec![0; horizon]; num_states];
        for (s, row) in actions.iter_mut().enumerate() {
            for (ti, slot) in row.iter_mut().enumerate() {
                *slot = self.deterministic_action(s, ti + 1)?;
            }
        }
        Some(TabularPolicy {
            num_states,
            num_actions: self.num_actions(),
            horizon,
            actions,
        })
    }
}
