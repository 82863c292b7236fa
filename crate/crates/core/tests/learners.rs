mod common;

use common::{random_env, rng};
use ctglab::learners::{
    argmax_policy, default_hedge_eta, empirical_cs_loss, ftl_select, hedge_update, ogd_regression_update,
    regret_terms, AggregatedDataset, FeatureMap, FinitePolicyClass, LinearQRegressor,
};
use ctglab::mdp::{exact_q, exact_state_distributions, finite_horizon_optimal_policy, steps_remaining};
use ctglab::sampling::{collect_nrpi_batch, CostToGoExample, Exploration};
use rand::Rng;

fn random_batch<R: Rng>(rng: &mut R, ns: usize, na: usize, horizon: usize, m: usize) -> Vec<CostToGoExample> {
    (0..m)
        .map(|_| CostToGoExample {
            state: rng.gen_range(0..ns),
            time: rng.gen_range(1..=horizon),
            action: rng.gen_range(0..na),
            q_estimate: rng.gen_range(0.0..horizon as f64),
        })
        .collect()
}

fn feature_maps(ns: usize, na: usize, horizon: usize) -> [FeatureMap; 2] {
    [
        FeatureMap::state_action_plus_time(ns, na, horizon),
        FeatureMap::state_action_time(ns, na, horizon),
    ]
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(1);
    for fm in feature_maps(4, 3, 5) {
        for _ in 0..10 {
            let batch = random_batch(&mut r, 4, 3, 5, 25);
            let weights: Vec<f64> = (0..fm.dim()).map(|_| r.gen_range(-2.0..2.0)).collect();
            let reg = LinearQRegressor::with_weights(fm, weights.clone()).unwrap();
            let g = reg.gradient(&batch).unwrap();
            let h = 1e-5;
            for i in 0..fm.dim() {
                let bumped = |delta: f64| {
                    let mut w = weights.clone();
                    w[i] += delta;
                    LinearQRegressor::with_weights(fm, w).unwrap().batch_loss(&batch).unwrap()
                };
                let fd = (bumped(h) - bumped(-h)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6, "coordinate {i}: analytic {} vs numeric {fd}", g[i]);
            }
        }
    }
}

#[test]
fn zero_step_leaves_weights_and_charges_current_loss() {
    let mut r = rng(2);
    let fm = FeatureMap::state_action_plus_time(3, 2, 4);
    let batch = random_batch(&mut r, 3, 2, 4, 10);
    let reg = LinearQRegressor::with_weights(fm, (0..fm.dim()).map(|i| i as f64 * 0.1).collect()).unwrap();
    let (next, loss) = ogd_regression_update(&reg, &batch, 0.0).unwrap();
    assert_eq!(next, reg);
    assert_eq!(loss, reg.batch_loss(&batch).unwrap());
    assert!(ogd_regression_update(&reg, &batch, -1.0).is_err());
}

#[test]
fn half_step_on_one_example_lands_on_the_target() {
    // One active coordinate, loss (w - q)^2, gradient 2(w - q): a step of 1/2 hits q.
    let fm = FeatureMap::state_action_time(2, 2, 3);
    let ex = CostToGoExample {
        state: 1,
        time: 2,
        action: 1,
        q_estimate: 1.75,
    };
    let reg = LinearQRegressor::with_weights(fm, vec![0.5; fm.dim()]).unwrap();
    let (next, before) = ogd_regression_update(&reg, &[ex], 0.5).unwrap();
    assert!((before - 1.25f64.powi(2)).abs() < 1e-15);
    assert!((next.predict(1, 1, 2) - 1.75).abs() < 1e-15);
    for (i, w) in next.weights.iter().enumerate() {
        if i != fm.active(1, 1, 2).as_slice()[0] {
            assert_eq!(*w, 0.5);
        }
    }
}

#[test]
fn ftl_agrees_with_a_hand_built_loss_table() {
    let mut r = rng(3);
    for trial in 0..30 {
        let env = random_env(100 + trial, 4, 3, 4);
        let (ns, na, horizon) = (4, 3, 4);
        let mut data = AggregatedDataset::new();
        for _ in 0..3 {
            data.push_round(random_batch(&mut r, ns, na, horizon, 40));
        }
        // Member k pays |A| q on every record whose action it would have taken.
        let table: Vec<f64> = env
            .class
            .members
            .iter()
            .map(|m| {
                let mut total = 0.0;
                for ex in data.iter() {
                    let p = m.action_distribution(ex.state, ex.time)[ex.action];
                    total += na as f64 * p * ex.q_estimate;
                }
                total / data.len() as f64
            })
            .collect();
        let mut expected = 0;
        for k in 1..table.len() {
            if table[k] < table[expected] {
                expected = k;
            }
        }
        assert_eq!(ftl_select(&data, &env.class).unwrap(), expected, "trial {trial}: {table:?}");
        for (k, m) in env.class.members.iter().enumerate() {
            assert!((empirical_cs_loss(data.iter(), m).unwrap() - table[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn hedge_two_members_closed_form() {
    // Start uniform, losses (0, 1), eta 1: weights (1, e^-1) / (1 + e^-1).
    let w = hedge_update(&[0.5, 0.5], &[0.0, 1.0], 1.0).unwrap();
    let e = (-1.0f64).exp();
    assert!((w[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
    assert!((w[1] - e / (1.0 + e)).abs() < 1e-15);
    // A second identical round squares the likelihood ratio.
    let w2 = hedge_update(&w, &[0.0, 1.0], 1.0).unwrap();
    assert!((w2[1] / w2[0] - e * e).abs() < 1e-15);
}

#[test]
fn hedge_rejects_bad_inputs() {
    assert!(hedge_update(&[0.5, 0.5], &[0.0], 1.0).is_err());
    assert!(hedge_update(&[0.5, 0.5], &[0.0, f64::NAN], 1.0).is_err());
    assert!(hedge_update(&[0.5, 0.5], &[0.0, 1.0], 0.0).is_err());
    assert!(hedge_update(&[], &[], 1.0).is_err());
}

#[test]
fn large_eta_hedge_concentrates_on_the_leader() {
    // Large enough to separate members, small enough that no weight underflows
    // to zero over four rounds of losses in [0, |A| T].
    let eta = 10.0;
    let mut r = rng(4);
    for trial in 0..30 {
        let env = random_env(200 + trial, 5, 3, 4);
        let mut class: FinitePolicyClass = env.class.clone();
        let mut data = AggregatedDataset::new();
        for _ in 0..4 {
            let batch = random_batch(&mut r, 5, 3, 4, 30);
            let losses: Vec<f64> = class
                .members
                .iter()
                .map(|m| empirical_cs_loss(&batch, m).unwrap())
                .collect();
            class.weights = hedge_update(&class.weights, &losses, eta).unwrap();
            data.push_round(batch);
        }
        assert_eq!(class.heaviest(), ftl_select(&data, &class).unwrap(), "trial {trial}");
    }
}

#[test]
fn default_eta_formula() {
    let eta = default_hedge_eta(4, 100, 2.0);
    assert!((eta - (8.0 * 4f64.ln() / 100.0).sqrt() / 2.0).abs() < 1e-15);
}

#[test]
fn greedy_regressor_on_optimal_q_is_the_optimal_policy() {
    for seed in 0..20 {
        let env = random_env(300 + seed, 5, 3, 5);
        let spec = &env.spec;
        let (opt, q) = finite_horizon_optimal_policy(spec);
        let fm = FeatureMap::state_action_time(spec.num_states, spec.num_actions, spec.horizon);
        let mut w = vec![0.0; fm.dim()];
        for t in 1..=spec.horizon {
            for s in 0..spec.num_states {
                for a in 0..spec.num_actions {
                    w[fm.active(s, a, t).as_slice()[0]] = q.q(steps_remaining(spec.horizon, t), s, a);
                }
            }
        }
        let pi = argmax_policy(&LinearQRegressor::with_weights(fm, w).unwrap());
        for t in 1..=spec.horizon {
            for s in 0..spec.num_states {
                assert_eq!(pi.deterministic_action(s, t), opt.deterministic_action(s, t), "s={s} t={t}");
            }
        }
    }
}

#[test]
fn zero_weights_pick_the_first_action() {
    let fm = FeatureMap::state_action_plus_time(3, 4, 2);
    let pi = argmax_policy(&LinearQRegressor::zeros(fm));
    for s in 0..3 {
        for t in 1..=2 {
            assert_eq!(pi.deterministic_action(s, t), Some(0));
        }
    }
}

#[test]
fn regret_terms_match_brute_force() {
    let mut r = rng(5);
    for _ in 0..100 {
        let n = r.gen_range(1..10);
        let k = r.gen_range(1..6);
        let member_losses: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| r.gen::<f64>()).collect()).collect();
        let chosen: Vec<f64> = member_losses.iter().map(|row| row[r.gen_range(0..k)]).collect();
        let terms = regret_terms(&chosen, &member_losses).unwrap();
        let best = (0..k)
            .map(|j| member_losses.iter().map(|row| row[j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let expected = (chosen.iter().sum::<f64>() - best) / n as f64;
        assert!((terms.eps_regret - expected).abs() < 1e-12);
    }
    assert!(regret_terms(&[], &[]).is_err());
    assert!(regret_terms(&[0.1], &[vec![0.1], vec![0.2]]).is_err());
}

#[test]
fn cost_sensitive_loss_is_unbiased_for_the_exact_loss() {
    // Examples drawn from nu with uniform actions and the policy's own rollouts:
    // E[|A| 1{a = pi(s)} q] = (1/T) sum_t E_{s ~ nu_t} Q_pi(s, pi(s)).
    for seed in 0..5 {
        let env = random_env(400 + seed, 4, 3, 4);
        let spec = &env.spec;
        let pi = env.class.member(1);
        let nu = exact_state_distributions(spec, env.class.member(2)).unwrap();
        let q = exact_q(spec, pi).unwrap();
        let mut exact = 0.0;
        for t in 1..=spec.horizon {
            for s in 0..spec.num_states {
                let a = pi.deterministic_action(s, t).unwrap();
                exact += nu.at(t)[s] * q.q(steps_remaining(spec.horizon, t), s, a);
            }
        }
        exact /= spec.horizon as f64;

        let m = 20_000;
        let batch = collect_nrpi_batch(spec, pi, &Exploration::Schedule(nu.clone()), m, seed, 1).unwrap();
        let est = empirical_cs_loss(&batch, pi).unwrap();
        let na = spec.num_actions as f64;
        let terms: Vec<f64> = batch
            .iter()
            .map(|ex| if pi.deterministic_action(ex.state, ex.time) == Some(ex.action) { na * ex.q_estimate } else { 0.0 })
            .collect();
        let mean = terms.iter().sum::<f64>() / m as f64;
        let var = terms.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se = (var / m as f64).sqrt();
        assert!((est - mean).abs() < 1e-12);
        assert!((est - exact).abs() <= 4.0 * se, "seed {seed}: {est} vs {exact} (se {se})");
    }
}
