#![allow(dead_code)]

use ctglab::envs::{make_random_mdp, Environment, RandomMdpParams};
use ctglab::mdp::{Policy, StochasticPolicy, TabularPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_env(seed: u64, states: usize, actions: usize, horizon: usize) -> Environment {
    make_random_mdp(&RandomMdpParams {
        states,
        actions,
        horizon,
        seed,
        sparsity: 0.0,
        class_size: 4,
    })
    .unwrap()
}

/// Random sizes within `states <= max_s`, `actions <= max_a`, `horizon <= max_t`.
pub fn random_sized_env<R: Rng>(rng: &mut R, max_s: usize, max_a: usize, max_t: usize) -> Environment {
    let s = rng.gen_range(1..=max_s);
    let a = rng.gen_range(1..=max_a);
    let t = rng.gen_range(1..=max_t);
    random_env(rng.gen(), s, a, t)
}

pub fn random_tabular<R: Rng>(rng: &mut R, states: usize, actions: usize, horizon: usize) -> Policy {
    TabularPolicy::from_fn(states, actions, horizon, |_, _| rng.gen_range(0..actions)).into()
}

pub fn random_stochastic<R: Rng>(rng: &mut R, states: usize, actions: usize, horizon: usize) -> Policy {
    let probs = (0..states)
        .map(|_| {
            (0..horizon)
                .map(|_| {
                    let raw: Vec<f64> = (0..actions).map(|_| rng.gen::<f64>() + 1e-3).collect();
                    let z: f64 = raw.iter().sum();
                    raw.into_iter().map(|x| x / z).collect()
                })
                .collect()
        })
        .collect();
    StochasticPolicy {
        num_states: states,
        num_actions: actions,
        horizon,
        probs,
    }
    .into()
}

/// Either a deterministic or a stochastic random policy.
pub fn random_policy<R: Rng>(rng: &mut R, states: usize, actions: usize, horizon: usize) -> Policy {
    if rng.gen_bool(0.5) {
        random_tabular(rng, states, actions, horizon)
    } else {
        random_stochastic(rng, states, actions, horizon)
    }
}
