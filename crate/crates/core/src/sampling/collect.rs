use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{MdpSpec, Policy, StateDistSchedule};
use crate::sampling::rng::{sample_categorical, Purpose, RngStream, StreamKey};
use crate::sampling::rollout::{estimate_cost_to_go, roll_in, ResolvedPolicy};

/// One explored action and the sampled cost-to-go that followed it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostToGoExample {
    pub state: usize,
    /// Wall-clock step in `1..=T`.
    pub time: usize,
    pub action: usize,
    pub q_estimate: f64,
}

/// A state labelled with the expert's action, for classification baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationExample {
    pub state: usize,
    pub time: usize,
    pub expert_action: usize,
}

/// Where NRPI draws its exploration states from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exploration {
    /// `s_t ~ nu_t` directly.
    Schedule(StateDistSchedule),
    /// `s_t` is wherever this policy is after `t - 1` steps.
    Policy(Policy),
}

fn check_batch(spec: &MdpSpec, m: usize) -> Result<()> {
    spec.ensure_valid()?;
    if m == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    Ok(())
}

/// Draws `m` samples in parallel; sample `j` always uses the same substream,
/// and results come back in sample order.
fn par_samples<T, F>(m: usize, seed: u64, purpose: Purpose, iteration: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync,
{
    (0..m)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::new(seed, StreamKey::new(purpose, iteration, j));
            f(&mut rng)
        })
        .collect()
}

fn uniform_time<R: Rng + ?Sized>(horizon: usize, rng: &mut R) -> usize {
    rng.gen_range(1..=horizon)
}

/// One round of expert cost-to-go data: roll in with the per-step mixture of
/// `learner` and `expert`, explore a uniform action at a uniform step, then
/// let the expert finish the episode.
pub fn collect_aggrevate_batch(
    spec: &MdpSpec,
    learner: &Policy,
    expert: &Policy,
    beta: f64,
    m: usize,
    seed: u64,
    iteration: usize,
) -> Result<Vec<CostToGoExample>> {
    check_batch(spec, m)?;
    let mixture = Policy::per_step_mixture(learner.clone(), expert.clone(), beta);
    mixture.check_dims(spec)?;
    let na = spec.num_actions;
    Ok(par_samples(m, seed, Purpose::Collect, iteration, |rng| {
        let t = uniform_time(spec.horizon, rng);
        let resolved = ResolvedPolicy::resolve(&mixture, rng);
        let mut scratch = vec![0.0; na];
        let s = roll_in(spec, &resolved, t, &mut scratch, rng);
        let a = rng.gen_range(0..na);
        let q = estimate_cost_to_go(spec, s, t, a, expert, rng);
        CostToGoExample {
            state: s,
            time: t,
            action: a,
            q_estimate: q,
        }
    }))
}

/// One round of on-policy cost-to-go data: states from the exploration
/// distribution, a uniform action, then `current` to the end of the episode.
pub fn collect_nrpi_batch(
    spec: &MdpSpec,
    current: &Policy,
    exploration: &Exploration,
    m: usize,
    seed: u64,
    iteration: usize,
) -> Result<Vec<CostToGoExample>> {
    check_batch(spec, m)?;
    current.check_dims(spec)?;
    match exploration {
        Exploration::Schedule(nu) => {
            if nu.horizon() != spec.horizon || nu.num_states() != spec.num_states {
                return Err(Error::DimensionMismatch(format!(
                    "exploration schedule is {}x{}, MDP needs {}x{}",
                    nu.horizon(),
                    nu.num_states(),
                    spec.horizon,
                    spec.num_states
                )));
            }
        }
        Exploration::Policy(p) => p.check_dims(spec)?,
    }
    let na = spec.num_actions;
    Ok(par_samples(m, seed, Purpose::Collect, iteration, |rng| {
        let t = uniform_time(spec.horizon, rng);
        let s = match exploration {
            Exploration::Schedule(nu) => sample_categorical(nu.at(t), rng),
            Exploration::Policy(p) => {
                let resolved = ResolvedPolicy::resolve(p, rng);
                let mut scratch = vec![0.0; na];
                roll_in(spec, &resolved, t, &mut scratch, rng)
            }
        };
        let a = rng.gen_range(0..na);
        let q = estimate_cost_to_go(spec, s, t, a, current, rng);
        CostToGoExample {
            state: s,
            time: t,
            action: a,
            q_estimate: q,
        }
    }))
}

/// States visited by the per-step mixture of `learner` and `expert`, labelled
/// with the expert's action. With `beta = 1` this samples the expert's own
/// state distribution.
#[allow(clippy::too_many_arguments)]
pub fn collect_classification_batch(
    spec: &MdpSpec,
    learner: &Policy,
    expert: &Policy,
    beta: f64,
    m: usize,
    seed: u64,
    purpose: Purpose,
    iteration: usize,
) -> Result<Vec<ClassificationExample>> {
    check_batch(spec, m)?;
    let mixture = Policy::per_step_mixture(learner.clone(), expert.clone(), beta);
    mixture.check_dims(spec)?;
    let na = spec.num_actions;
    Ok(par_samples(m, seed, purpose, iteration, |rng| {
        let t = uniform_time(spec.horizon, rng);
        let resolved = ResolvedPolicy::resolve(&mixture, rng);
        let mut scratch = vec![0.0; na];
        let s = roll_in(spec, &resolved, t, &mut scratch, rng);
        let expert_action = ResolvedPolicy::resolve(expert, rng).sample_action(s, t, &mut scratch, rng);
        ClassificationExample {
            state: s,
            time: t,
            expert_action,
        }
    }))
}
