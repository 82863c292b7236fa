use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mdp::{MdpSpec, Policy};
use crate::sampling::rng::sample_categorical;

/// One step of a sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub cost: f64,
}

/// A policy with every trajectory-level choice already made.
///
/// Trajectory mixtures pick their member once, when the trajectory starts;
/// per-step mixtures flip their coin at every step.
#[derive(Debug)]
pub enum ResolvedPolicy<'a> {
    Markov(&'a Policy),
    Mix {
        base: Box<ResolvedPolicy<'a>>,
        expert: Box<ResolvedPolicy<'a>>,
        beta: f64,
    },
}

impl<'a> ResolvedPolicy<'a> {
    pub fn resolve<R: Rng + ?Sized>(pi: &'a Policy, rng: &mut R) -> Self {
        match pi {
            Policy::TrajectoryUniformMixture { members } => {
                let k = rng.gen_range(0..members.len());
                Self::resolve(&members[k], rng)
            }
            Policy::PerStepMixture { base, expert, beta } if !pi.is_markov() => ResolvedPolicy::Mix {
                base: Box::new(Self::resolve(base, rng)),
                expert: Box::new(Self::resolve(expert, rng)),
                beta: *beta,
            },
            _ => ResolvedPolicy::Markov(pi),
        }
    }

    /// Draws `a ~ pi(. | s, t)`. `scratch` must have one slot per action.
    pub fn sample_action<R: Rng + ?Sized>(
        &self,
        s: usize,
        t: usize,
        scratch: &mut [f64],
        rng: &mut R,
    ) -> usize {
        match self {
            ResolvedPolicy::Markov(pi) => match pi.deterministic_action(s, t) {
                Some(a) => a,
                None => {
                    pi.fill_action_distribution(s, t, scratch);
                    sample_categorical(scratch, rng)
                }
            },
            ResolvedPolicy::Mix { base, expert, beta } => {
                if rng.gen::<f64>() < *beta {
                    expert.sample_action(s, t, scratch, rng)
                } else {
                    base.sample_action(s, t, scratch, rng)
                }
            }
        }
    }
}

pub fn sample_initial_state<R: Rng + ?Sized>(spec: &MdpSpec, rng: &mut R) -> usize {
    sample_categorical(&spec.initial_dist, rng)
}

pub fn sample_next_state<R: Rng + ?Sized>(spec: &MdpSpec, s: usize, a: usize, rng: &mut R) -> usize {
    sample_categorical(spec.next_dist(s, a), rng)
}

/// Runs `pi` from a fresh initial state for `T` steps.
pub fn sample_trajectory<R: Rng + ?Sized>(spec: &MdpSpec, pi: &Policy, rng: &mut R) -> Vec<Step> {
    let resolved = ResolvedPolicy::resolve(pi, rng);
    let mut scratch = vec![0.0; spec.num_actions];
    let mut s = sample_initial_state(spec, rng);
    let mut out = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let a = resolved.sample_action(s, t, &mut scratch, rng);
        out.push(Step {
            state: s,
            action: a,
            cost: spec.cost(s, a),
        });
        if t < spec.horizon {
            s = sample_next_state(spec, s, a, rng);
        }
    }
    out
}

/// Total cost of one sampled trajectory.
pub fn sample_return<R: Rng + ?Sized>(spec: &MdpSpec, pi: &Policy, rng: &mut R) -> f64 {
    sample_trajectory(spec, pi, rng).iter().map(|st| st.cost).sum()
}

/// Advances `resolved` from a fresh initial state through steps `1..t` and
/// returns the state occupied at step `t`.
pub fn roll_in<R: Rng + ?Sized>(
    spec: &MdpSpec,
    resolved: &ResolvedPolicy<'_>,
    t: usize,
    scratch: &mut [f64],
    rng: &mut R,
) -> usize {
    let mut s = sample_initial_state(spec, rng);
    for tau in 1..t {
        let a = resolved.sample_action(s, tau, scratch, rng);
        s = sample_next_state(spec, s, a, rng);
    }
    s
}

/// `C(s, a)` plus the sampled costs of following `continuation` from `t + 1`
/// to `T`. A single rollout; unbiased for `Q_{T - t + 1}(s, a)` of the continuation.
pub fn estimate_cost_to_go<R: Rng + ?Sized>(
    spec: &MdpSpec,
    s: usize,
    t: usize,
    a: usize,
    continuation: &Policy,
    rng: &mut R,
) -> f64 {
    debug_assert!((1..=spec.horizon).contains(&t));
    let mut total = spec.cost(s, a);
    if t == spec.horizon {
        return total;
    }
    let resolved = ResolvedPolicy::resolve(continuation, rng);
    let mut scratch = vec![0.0; spec.num_actions];
    let mut state = sample_next_state(spec, s, a, rng);
    for tau in t + 1..=spec.horizon {
        let act = resolved.sample_action(state, tau, &mut scratch, rng);
        total += spec.cost(state, act);
        if tau < spec.horizon {
            state = sample_next_state(spec, state, act, rng);
        }
    }
    total
}
