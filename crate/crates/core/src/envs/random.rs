use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::learners::FinitePolicyClass;
use crate::mdp::{finite_horizon_optimal_policy, MdpSpec, Policy, TabularPolicy};
use crate::sampling::{Purpose, RngStream, StreamKey};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomMdpParams {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Fraction of next states zeroed out in each transition row.
    pub sparsity: f64,
    /// Size of the policy class, the expert included.
    pub class_size: usize,
}

impl Default for RandomMdpParams {
    fn default() -> Self {
        Self {
            states: 5,
            actions: 3,
            horizon: 5,
            seed: 0,
            sparsity: 0.0,
            class_size: 4,
        }
    }
}

fn dirichlet_row<R: Rng + ?Sized>(n: usize, keep: usize, rng: &mut R) -> Vec<f64> {
    let mut support: Vec<usize> = (0..n).collect();
    support.shuffle(rng);
    let mut row = vec![0.0; n];
    for &i in &support[..keep] {
        // Exp(1) = Gamma(1, 1); normalized, these are a flat Dirichlet draw.
        row[i] = rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE;
    }
    let z: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= z);
    row
}

/// Random MDP with flat-Dirichlet transition rows, uniform costs and the
/// optimal policy as expert. The class is the expert plus random
/// deterministic stationary policies.
pub fn make_random_mdp(p: &RandomMdpParams) -> Result<Environment> {
    if p.states == 0 || p.states > 20 || p.actions == 0 || p.actions > 4 || p.horizon == 0 {
        return Err(Error::InvalidArgument(format!(
            "random MDP must have 1..=20 states, 1..=4 actions and a positive horizon, got {}/{}/{}",
            p.states, p.actions, p.horizon
        )));
    }
    if !(0.0..1.0).contains(&p.sparsity) {
        return Err(Error::InvalidArgument(format!("sparsity must lie in [0, 1), got {}", p.sparsity)));
    }
    if p.class_size == 0 {
        return Err(Error::InvalidArgument("class size must be at least 1".into()));
    }
    let mut rng = RngStream::new(p.seed, StreamKey::new(Purpose::Misc, 0, 0));
    let (ns, na) = (p.states, p.actions);
    let keep = ((ns as f64) * (1.0 - p.sparsity)).ceil().max(1.0) as usize;
    let transitions = (0..ns)
        .map(|_| (0..na).map(|_| dirichlet_row(ns, keep, &mut rng)).collect())
        .collect();
    let costs = (0..ns).map(|_| (0..na).map(|_| rng.gen::<f64>()).collect()).collect();
    let initial = dirichlet_row(ns, ns, &mut rng);
    let spec = MdpSpec::new(ns, na, p.horizon, transitions, costs, initial)?;
    let (expert, _) = finite_horizon_optimal_policy(&spec);
    let class = random_policy_class(&spec, &expert, p.class_size - 1, &mut rng)?;
    Ok(Environment {
        name: "random".into(),
        spec,
        expert,
        class,
    })
}

/// `[expert, random_1, ..., random_extra]` with stationary random members.
pub fn random_policy_class<R: Rng + ?Sized>(
    spec: &MdpSpec,
    expert: &Policy,
    extra: usize,
    rng: &mut R,
) -> Result<FinitePolicyClass> {
    let mut members = vec![expert.clone()];
    let mut names = vec!["expert".to_string()];
    for k in 1..=extra {
        let per_state: Vec<usize> = (0..spec.num_states).map(|_| rng.gen_range(0..spec.num_actions)).collect();
        members.push(TabularPolicy::stationary(&per_state, spec.num_actions, spec.horizon).into());
        names.push(format!("random_{k}"));
    }
    FinitePolicyClass::new(members, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::validate_mdp;

    #[test]
    fn same_seed_same_bytes() {
        let p = RandomMdpParams { seed: 42, sparsity: 0.4, ..Default::default() };
        let a = make_random_mdp(&p).unwrap();
        let b = make_random_mdp(&p).unwrap();
        assert_eq!(a.spec.to_json().unwrap(), b.spec.to_json().unwrap());
        assert_eq!(a.class, b.class);
    }

    #[test]
    fn many_seeds_validate() {
        for seed in 0..1000 {
            let p = RandomMdpParams {
                states: 1 + (seed as usize % 8),
                actions: 1 + (seed as usize % 4),
                horizon: 1 + (seed as usize % 5),
                seed,
                sparsity: (seed % 10) as f64 / 10.0,
                class_size: 3,
            };
            let env = make_random_mdp(&p).unwrap();
            assert!(validate_mdp(&env.spec).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn out_of_scale_inputs_are_rejected() {
        assert!(make_random_mdp(&RandomMdpParams { states: 21, ..Default::default() }).is_err());
        assert!(make_random_mdp(&RandomMdpParams { actions: 5, ..Default::default() }).is_err());
        assert!(make_random_mdp(&RandomMdpParams { sparsity: 1.0, ..Default::default() }).is_err());
    }
}
