//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Runs with a plain `main` so the verdict lines are always printed;
//! the process exits nonzero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{random_env, random_policy, random_sized_env, random_tabular, rng};
use ctglab::algorithms::{
    behavior_cloning, dagger_classification, run_aggrevate, run_nrpi, theorem1_check, theorem2_diagnostics,
    theorem3_check, BetaSchedule, FeatureKind, LearnerConfig, RunParams,
};
use ctglab::envs::{make_cliff_corridor, make_two_road, CliffParams, Environment, TwoRoad};
use ctglab::learners::{default_hedge_eta, hedge_update, FinitePolicyClass};
use ctglab::mdp::{
    exact_q, exact_state_distributions, expectation_gap_bound_check, mixing_l1_bound_check, performance_difference,
    policy_value, steps_remaining, StateDistSchedule,
};
use ctglab::sampling::{estimate_cost_to_go, Exploration, Purpose, RngStream, StreamKey};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn criterion(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = v.pass && in_time;
    let timing = if in_time {
        format!("{:.2}s", elapsed.as_secs_f64())
    } else {
        format!("{:.2}s, over the {}s budget", elapsed.as_secs_f64(), budget.as_secs())
    };
    println!(
        "{} criterion {id:>2} {name}: {} ({timing})",
        if pass { "PASS" } else { "FAIL" },
        v.detail
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn performance_difference_identity() -> Verdict {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let env = random_sized_env(&mut r, 6, 3, 6);
        let spec = &env.spec;
        let (ns, na, t) = (spec.num_states, spec.num_actions, spec.horizon);
        let pi = random_policy(&mut r, ns, na, t);
        let pi_prime = random_policy(&mut r, ns, na, t);
        let pd = performance_difference(spec, &pi, &pi_prime).unwrap();
        let gap = policy_value(spec, &pi).unwrap() - policy_value(spec, &pi_prime).unwrap();
        worst = worst.max((gap - pd.rhs_form1).abs()).max((gap - pd.rhs_form2).abs());
    }
    Verdict::new(worst <= 1e-9, format!("200 triples, worst residual {worst:.2e} (tolerance 1e-9)"))
}

fn random_distribution<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| r.gen::<f64>().powi(3)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

fn lemma_checks() -> Verdict {
    let mut r = rng(202);
    let mut gap_held = 0;
    let mut worst_gap_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let n = r.gen_range(1..12);
        let p = random_distribution(&mut r, n);
        let q = random_distribution(&mut r, n);
        let lo = r.gen_range(-3.0..3.0);
        let hi = lo + r.gen_range(0.0..5.0);
        let f: Vec<f64> = (0..n).map(|_| r.gen_range(lo..=hi)).collect();
        let c = expectation_gap_bound_check(&p, &q, &f, lo, hi).unwrap();
        worst_gap_excess = worst_gap_excess.max(c.gap - c.bound);
        gap_held += usize::from(c.gap <= c.bound + 1e-12);
    }
    let mut mix_held = 0;
    let mut worst_mix_excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let env = random_sized_env(&mut r, 6, 3, 6);
        let spec = &env.spec;
        let learner = random_policy(&mut r, spec.num_states, spec.num_actions, spec.horizon);
        let expert = random_policy(&mut r, spec.num_states, spec.num_actions, spec.horizon);
        let beta = if r.gen_bool(0.5) {
            r.gen_range(0.0..1.0 / spec.horizon as f64)
        } else {
            r.gen::<f64>()
        };
        let c = mixing_l1_bound_check(spec, &expert, &learner, beta).unwrap();
        worst_mix_excess = worst_mix_excess.max(c.lhs - c.bound);
        mix_held += usize::from(c.lhs <= c.bound + 1e-9);
    }
    Verdict::new(
        gap_held == 100 && mix_held == 100,
        format!(
            "expectation gap {gap_held}/100 (worst excess {worst_gap_excess:.2e}), \
             mixing {mix_held}/100 (worst excess {worst_mix_excess:.2e})"
        ),
    )
}

fn rollout_unbiasedness() -> Verdict {
    let samples = 400;
    let mut cells = 0;
    let mut bad = Vec::new();
    let mut r = rng(303);
    for mdp in 0..10 {
        let env = random_env(3000 + mdp, 4, 3, 5);
        let spec = &env.spec;
        let pi = random_policy(&mut r, spec.num_states, spec.num_actions, spec.horizon);
        let q = exact_q(spec, &pi).unwrap();
        for t in 1..=spec.horizon {
            for s in 0..spec.num_states {
                for a in 0..spec.num_actions {
                    let cell = (t * spec.num_states + s) * spec.num_actions + a;
                    let xs: Vec<f64> = (0..samples)
                        .map(|j| {
                            let mut g = RngStream::new(mdp, StreamKey::new(Purpose::Misc, cell, j));
                            estimate_cost_to_go(spec, s, t, a, &pi, &mut g)
                        })
                        .collect();
                    let mean = xs.iter().sum::<f64>() / samples as f64;
                    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
                    let se = (var / samples as f64).sqrt();
                    let exact = q.q(steps_remaining(spec.horizon, t), s, a);
                    cells += 1;
                    if (mean - exact).abs() > 4.0 * se + 1e-12 {
                        bad.push(format!("mdp {mdp} (s={s}, t={t}, a={a}): {mean:.4} vs {exact:.4} se {se:.4}"));
                    }
                }
            }
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!("{cells} cells x {samples} rollouts, {} outside 4 standard errors {bad:?}", bad.len()),
    )
}

fn cliff() -> Environment {
    make_cliff_corridor(&CliffParams::default()).unwrap()
}

fn theorem1_bound() -> Verdict {
    let cliff = cliff();
    let mut runs = 0;
    let mut worst_margin = f64::INFINITY;
    let mut failures = 0;
    for i in 0..50u64 {
        let env = if i % 2 == 0 {
            cliff.clone()
        } else {
            random_env(4000 + i, 6, 3, 5)
        };
        let learner = if (i / 2) % 2 == 0 {
            LearnerConfig::Ftl
        } else {
            LearnerConfig::Hedge { eta: None }
        };
        let n = [5, 10, 20, 40][(i % 4) as usize];
        let m = [50, 100, 300][(i % 3) as usize];
        let schedule = BetaSchedule::new([1.0, 0.5, 0.2][(i % 3) as usize]).unwrap();
        let mut params = RunParams::new(n, m, i);
        params.initial_member = (i as usize) % env.class.len();
        let out = run_aggrevate(&env.spec, &env.expert, Some(&env.class), &learner, schedule, &params).unwrap();
        let check = theorem1_check(&env.spec, &env.expert, &env.class, &out.played, schedule).unwrap();
        let j_mix = out.report.summary.j_mixture.unwrap();
        let je = out.report.summary.j_expert.unwrap();
        // The check's left side must be the recorded exact gap.
        let consistent = (check.lhs - (j_mix - je)).abs() <= 1e-9;
        runs += 1;
        worst_margin = worst_margin.min(check.margin());
        failures += usize::from(check.margin() < -1e-9 || !consistent);
    }
    Verdict::new(
        failures == 0,
        format!("{} of {runs} runs hold, smallest margin {worst_margin:.3e}", runs - failures),
    )
}

fn theorem3_bound() -> Verdict {
    let mut runs = 0;
    let mut failures = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_matched_d: f64 = 0.0;
    let cliff = cliff();
    for i in 0..50u64 {
        let env = if i % 5 == 0 {
            cliff.clone()
        } else {
            random_env(5000 + i, 5, 3, 4)
        };
        let spec = &env.spec;
        let comparator_index = (i as usize) % env.class.len();
        let comparator = env.class.member(comparator_index).clone();
        let matched = i % 2 == 0;
        let nu = if matched {
            exact_state_distributions(spec, &comparator).unwrap()
        } else {
            let mut r = rng(i);
            let other = random_tabular(&mut r, spec.num_states, spec.num_actions, spec.horizon);
            let uniform = vec![1.0 / spec.num_states as f64; spec.num_states];
            if i % 4 == 1 {
                StateDistSchedule::constant(uniform, spec.horizon).unwrap()
            } else {
                exact_state_distributions(spec, &other).unwrap()
            }
        };
        let learner = if (i / 2) % 2 == 0 {
            LearnerConfig::Ftl
        } else {
            LearnerConfig::Hedge { eta: None }
        };
        let params = RunParams::new([5, 10, 20][(i % 3) as usize], 100, i);
        let out = run_nrpi(spec, &Exploration::Schedule(nu.clone()), Some(&env.class), &learner, None, &params).unwrap();
        let check = theorem3_check(spec, &comparator, &env.class, &nu, &out.played).unwrap();
        if matched {
            worst_matched_d = worst_matched_d.max(check.components["mismatch_term"].abs());
        }
        runs += 1;
        worst_margin = worst_margin.min(check.margin());
        failures += usize::from(check.margin() < -1e-9);
    }
    Verdict::new(
        failures == 0 && worst_matched_d <= 1e-12,
        format!(
            "{} of {runs} runs hold, smallest margin {worst_margin:.3e}, matched mismatch term at most {worst_matched_d:.1e}",
            runs - failures
        ),
    )
}

fn theorem2_diagnostics_hold() -> Verdict {
    let cliff = cliff();
    let mut held = 0;
    let mut runs = 0;
    for i in 0..30u64 {
        let env = if i % 3 == 0 {
            cliff.clone()
        } else {
            random_env(6000 + i, 5, 3, 4)
        };
        let features = if i % 2 == 0 {
            FeatureKind::StateActionTime
        } else {
            FeatureKind::StateActionPlusTime
        };
        let learner = if (i / 2) % 2 == 0 {
            LearnerConfig::BatchRegression { ridge: 0.0, features }
        } else {
            LearnerConfig::OgdRegression {
                step_size: 0.5,
                features,
            }
        };
        let schedule = BetaSchedule::new(1.0).unwrap();
        let params = RunParams::new(10, 200, i);
        let out = run_aggrevate(&env.spec, &env.expert, None, &learner, schedule, &params).unwrap();
        let check = theorem2_diagnostics(&env.spec, &env.expert, &out.played, &out.dataset, schedule, 0.1).unwrap();
        runs += 1;
        held += usize::from(check.holds);
    }

    // Deterministic dynamics and a deterministic expert make every target a
    // function of (s, a, t), which joint one-hot features represent exactly.
    let det = make_cliff_corridor(&CliffParams {
        slip: 0.0,
        ..Default::default()
    })
    .unwrap();
    let schedule = BetaSchedule::new(1.0).unwrap();
    let learner = LearnerConfig::BatchRegression {
        ridge: 0.0,
        features: FeatureKind::StateActionTime,
    };
    let out = run_aggrevate(&det.spec, &det.expert, None, &learner, schedule, &RunParams::new(10, 200, 7)).unwrap();
    let check = theorem2_diagnostics(&det.spec, &det.expert, &out.played, &out.dataset, schedule, 0.1).unwrap();
    let eps_class = check.components["eps_hat_class"];
    Verdict::new(
        held >= 27 && eps_class.abs() <= 1e-6,
        format!("bound holds in {held}/{runs} runs (need 27), realizable eps_hat_class {eps_class:.2e}"),
    )
}

/// Round index and current weights to that round's member losses.
type LossSequence = dyn FnMut(usize, &[f64]) -> Vec<f64>;

/// Average Hedge regret against the best fixed member, charging the
/// learner its expected loss under the current weights.
fn hedge_regret(losses_for: &mut LossSequence, k: usize, rounds: usize) -> f64 {
    let eta = default_hedge_eta(k, rounds, 1.0);
    let mut w = vec![1.0 / k as f64; k];
    let mut learner = 0.0;
    let mut totals = vec![0.0; k];
    for i in 0..rounds {
        let l = losses_for(i, &w);
        learner += w.iter().zip(&l).map(|(a, b)| a * b).sum::<f64>();
        for (t, x) in totals.iter_mut().zip(&l) {
            *t += x;
        }
        w = hedge_update(&w, &l, eta).unwrap();
    }
    (learner - totals.iter().copied().fold(f64::INFINITY, f64::min)) / rounds as f64
}

fn no_regret_decay() -> Verdict {
    let rounds = 400;
    let mut worst_ratio: f64 = 0.0;
    let mut hedge_ok = true;
    for k in [2usize, 3, 5, 8] {
        // Losses lie in [0, 1], so loss_max is 1.
        let bound = ((k as f64).ln() / (2.0 * rounds as f64)).sqrt();
        let mut r = rng(700 + k as u64);
        let mut sequences: Vec<Box<LossSequence>> = vec![
            // Punishes whichever member currently carries the most weight.
            Box::new(move |_, w: &[f64]| {
                let top = (0..w.len()).fold(0, |b, j| if w[j] > w[b] { j } else { b });
                (0..w.len()).map(|j| f64::from(u8::from(j == top))).collect()
            }),
            // Alternating leader, the classic sequence that defeats Follow-The-Leader.
            Box::new(move |i, w: &[f64]| {
                (0..w.len())
                    .map(|j| match (i, j) {
                        (0, 0) => 0.5,
                        (0, _) => 0.0,
                        _ if j == i % w.len() => 1.0,
                        _ => 0.0,
                    })
                    .collect()
            }),
            Box::new(move |_, w: &[f64]| (0..w.len()).map(|_| r.gen::<f64>()).collect()),
        ];
        for seq in sequences.iter_mut() {
            let regret = hedge_regret(seq.as_mut(), k, rounds);
            worst_ratio = worst_ratio.max(regret / bound);
            hedge_ok &= regret <= 1.1 * bound;
        }
    }

    let env = cliff();
    let t = env.spec.horizon as f64;
    let schedule = BetaSchedule::new(1.0).unwrap();
    let mut worst_ftl: f64 = f64::NEG_INFINITY;
    for seed in 0..5 {
        let out = run_aggrevate(
            &env.spec,
            &env.expert,
            Some(&env.class),
            &LearnerConfig::Ftl,
            schedule,
            &RunParams::new(40, 100, seed),
        )
        .unwrap();
        let check = theorem1_check(&env.spec, &env.expert, &env.class, &out.played, schedule).unwrap();
        worst_ftl = worst_ftl.max(check.components["eps_regret"]);
    }
    Verdict::new(
        hedge_ok && worst_ftl <= 0.05 * t,
        format!(
            "Hedge regret at most {worst_ratio:.3} x bound at N = {rounds} (limit 1.1), \
             FTL eps_regret at N = 40 at most {worst_ftl:.4} (limit {:.2})",
            0.05 * t
        ),
    )
}

fn cliff_ordering() -> Verdict {
    let env = cliff();
    // Without the expert the class is not realizable, and round 1 plays
    // the member that walks off the edge.
    let class: FinitePolicyClass = env.class.without(env.class.index_of("expert").unwrap()).unwrap();
    let start = class.index_of("cliff_seeker").unwrap();
    let schedule = BetaSchedule::new(1.0).unwrap();
    let (mut vs_bc, mut vs_dagger) = (0, 0);
    for seed in 0..20 {
        let mut params = RunParams::new(10, 100, seed);
        params.initial_member = start;
        let ja = run_aggrevate(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, schedule, &params)
            .unwrap()
            .report
            .summary
            .j_best
            .unwrap();
        let jd = dagger_classification(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, schedule, &params)
            .unwrap()
            .report
            .summary
            .j_best
            .unwrap();
        let jb = behavior_cloning(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, &params)
            .unwrap()
            .report
            .summary
            .j_best
            .unwrap();
        vs_bc += usize::from(ja <= jb + 1e-12);
        vs_dagger += usize::from(ja <= jd + 1e-12);
    }
    Verdict::new(
        vs_bc >= 18 && vs_dagger >= 14,
        format!("J(aggrevate) <= J(cloning) in {vs_bc}/20 (need 18), <= J(dagger) in {vs_dagger}/20 (need 14)"),
    )
}

fn two_road_pathology() -> Verdict {
    let env = make_two_road(8).unwrap();
    let long = env.class.member(env.class.index_of("long_road").unwrap());
    let j_long = policy_value(&env.spec, long).unwrap();
    let schedule = BetaSchedule::new(1.0).unwrap();
    let mut short = 0;
    let mut j_short = f64::INFINITY;
    for seed in 0..20 {
        let out = run_aggrevate(
            &env.spec,
            &env.expert,
            Some(&env.class),
            &LearnerConfig::Ftl,
            schedule,
            &RunParams::new(10, 100, seed),
        )
        .unwrap();
        let first = out.best.action_distribution(TwoRoad::START, 1);
        if first[TwoRoad::TAKE_SHORT] == 1.0 {
            short += 1;
            j_short = j_short.min(out.report.summary.j_best.unwrap());
        }
    }
    Verdict::new(
        short >= 18 && j_long < j_short,
        format!(
            "returned policy takes the short road in {short}/20 (need 18); cheapest short-road return J {j_short:.3} \
             vs long-road member {j_long:.3}"
        ),
    )
}

const DETERMINISM_CONFIGS: [&str; 4] = [
    r#"
algorithm = "aggrevate"
learner = "hedge"
iterations = 8
samples_per_iteration = 150
seed = 21
[env]
kind = "cliff_corridor"
"#,
    r#"
algorithm = "aggrevate"
learner = "ogd_regression"
iterations = 6
samples_per_iteration = 120
seed = 22
[env]
kind = "random"
states = 6
horizon = 5
"#,
    r#"
algorithm = "nrpi"
learner = "ftl"
iterations = 6
samples_per_iteration = 120
seed = 23
oracle_mode = false
validation_budget = 300
exploration = "comparator_rollout"
[env]
kind = "random"
states = 5
"#,
    r#"
algorithm = "dagger_classification"
learner = "ftl"
iterations = 6
samples_per_iteration = 120
seed = 24
[env]
kind = "two_road"
horizon = 8
"#,
];

fn run_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().is_some_and(|n| n != "timing.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::TempDir::new().unwrap();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for (c, body) in DETERMINISM_CONFIGS.iter().enumerate() {
        let cfg = tmp.path().join(format!("c{c}.toml"));
        fs::write(&cfg, body).unwrap();
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for (k, workers) in ["1", "1", "2", "8"].iter().enumerate() {
            let out = tmp.path().join(format!("c{c}_{k}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ctglab"))
                .args(["--workers", workers, "run", "--config"])
                .arg(&cfg)
                .arg("--out-dir")
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                mismatches.push(format!("config {c} failed: {}", String::from_utf8_lossy(&status.stderr)));
                continue;
            }
            let files = run_dir_bytes(&out);
            match &reference {
                None => reference = Some(files),
                Some(r) => {
                    compared += 1;
                    if r != &files {
                        mismatches.push(format!("config {c} with {workers} workers"));
                    }
                }
            }
        }
    }
    Verdict::new(
        mismatches.is_empty() && compared == 12,
        format!("4 configs x 4 runs (workers 1, 1, 2, 8), {compared} byte comparisons, mismatches {mismatches:?}"),
    )
}

fn main() -> ExitCode {
    let results = [
        criterion(1, "performance difference identity", secs(5), performance_difference_identity),
        criterion(2, "expectation gap and mixing lemmas", secs(5), lemma_checks),
        criterion(3, "rollout unbiasedness", secs(30), rollout_unbiasedness),
        criterion(4, "finite-class imitation bound", secs(120), theorem1_bound),
        criterion(5, "policy iteration bound", secs(120), theorem3_bound),
        criterion(6, "regression diagnostics", secs(180), theorem2_diagnostics_hold),
        criterion(7, "no-regret decay", secs(60), no_regret_decay),
        criterion(8, "cliff corridor ordering", secs(180), cliff_ordering),
        criterion(9, "two-road limitation", secs(120), two_road_pathology),
        criterion(10, "determinism across workers", secs(120), determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} acceptance criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
