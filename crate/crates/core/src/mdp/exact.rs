//! Closed-form evaluation of policies by forward and backward dynamic programming.
//!
//! Public Q/V tables are indexed by *steps remaining* `k` in `1..=T`:
//! `Q[k][s][a]` is the expected cost of doing `a` in `s` and then following
//! the policy for `k - 1` more steps. Policies are queried by wall-clock time,
//! and [`exact_q`] is the only place that translates between the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{MdpSpec, Policy};
use crate::tolerance;

/// Wall-clock step `t` of a horizon-`T` problem has `T - t + 1` steps remaining.
#[inline]
pub fn steps_remaining(horizon: usize, t: usize) -> usize {
    horizon + 1 - t
}

/// Per-time state distributions `d^t` for `t = 1..=T` and their time average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDistSchedule {
    pub per_time: Vec<Vec<f64>>,
    pub averaged: Vec<f64>,
}

impl StateDistSchedule {
    pub fn new(per_time: Vec<Vec<f64>>) -> Result<Self> {
        let first = per_time.first().ok_or(Error::Empty("state distribution schedule"))?;
        let n = first.len();
        if let Some(bad) = per_time.iter().find(|d| d.len() != n) {
            return Err(Error::ShapeMismatch {
                left: n,
                right: bad.len(),
            });
        }
        let w = 1.0 / per_time.len() as f64;
        let mut averaged = vec![0.0; n];
        for d in &per_time {
            for (acc, x) in averaged.iter_mut().zip(d) {
                *acc += w * x;
            }
        }
        Ok(Self { per_time, averaged })
    }

    pub fn horizon(&self) -> usize {
        self.per_time.len()
    }

    pub fn num_states(&self) -> usize {
        self.averaged.len()
    }

    /// `d^t` for wall-clock `t` in `1..=T`.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.per_time[t - 1]
    }

    /// Same distribution at every step.
    pub fn constant(dist: Vec<f64>, horizon: usize) -> Result<Self> {
        Self::new(vec![dist; horizon])
    }
}

/// Q and V tables of one policy, indexed by steps remaining.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    q: Vec<f64>,
    v: Vec<f64>,
}

impl QTable {
    fn zeros(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            horizon,
            num_states,
            num_actions,
            q: vec![0.0; horizon * num_states * num_actions],
            v: vec![0.0; horizon * num_states],
        }
    }

    #[inline]
    fn q_index(&self, k: usize, s: usize, a: usize) -> usize {
        ((k - 1) * self.num_states + s) * self.num_actions + a
    }

    /// `Q_k(s, a)` with `k` steps remaining, `k` in `1..=T`.
    #[inline]
    pub fn q(&self, k: usize, s: usize, a: usize) -> f64 {
        self.q[self.q_index(k, s, a)]
    }

    /// `V_k(s)` with `k` steps remaining; `V_0 = 0`.
    #[inline]
    pub fn v(&self, k: usize, s: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.v[(k - 1) * self.num_states + s]
        }
    }

    /// `Q_k(s, .)` as a slice over actions.
    pub fn q_row(&self, k: usize, s: usize) -> &[f64] {
        let i = self.q_index(k, s, 0);
        &self.q[i..i + self.num_actions]
    }

    /// `sum_a pi(a) Q_k(s, a)` for an arbitrary action distribution.
    pub fn q_under(&self, k: usize, s: usize, action_dist: &[f64]) -> f64 {
        self.q_row(k, s).iter().zip(action_dist).map(|(q, p)| q * p).sum()
    }

    pub fn max_q(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }

    /// `min_a Q_k(s, a)`.
    pub fn min_q(&self, k: usize, s: usize) -> f64 {
        self.q_row(k, s).iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Flat copy in `[k - 1][s][a]` order.
    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v
    }
}

fn require_markov(pi: &Policy, what: &'static str) -> Result<()> {
    if pi.is_markov() {
        Ok(())
    } else {
        Err(Error::NonMarkov(what))
    }
}

/// Forward recursion `d^{t+1}(s') = sum_{s,a} d^t(s) pi(a|s,t) P[s][a][s']`.
///
/// A top-level trajectory mixture of Markov members is handled exactly by
/// averaging the members' schedules.
pub fn exact_state_distributions(spec: &MdpSpec, pi: &Policy) -> Result<StateDistSchedule> {
    pi.check_dims(spec)?;
    if let Policy::TrajectoryUniformMixture { members } = pi {
        let schedules = members
            .iter()
            .map(|m| exact_state_distributions(spec, m))
            .collect::<Result<Vec<_>>>()?;
        let w = 1.0 / schedules.len() as f64;
        let per_time = (0..spec.horizon)
            .map(|ti| {
                let mut d = vec![0.0; spec.num_states];
                for sch in &schedules {
                    for (acc, x) in d.iter_mut().zip(&sch.per_time[ti]) {
                        *acc += w * x;
                    }
                }
                d
            })
            .collect();
        return StateDistSchedule::new(per_time);
    }
    require_markov(pi, "state distributions of a nested trajectory mixture")?;

    let (ns, na) = (spec.num_states, spec.num_actions);
    let mut per_time = Vec::with_capacity(spec.horizon);
    per_time.push(spec.initial_dist.clone());
    let mut act = vec![0.0; na];
    for t in 1..spec.horizon {
        let cur = &per_time[t - 1];
        let mut next = vec![0.0; ns];
        for (s, &ws) in cur.iter().enumerate() {
            if ws == 0.0 {
                continue;
            }
            pi.fill_action_distribution(s, t, &mut act);
            for (a, &pa) in act.iter().enumerate() {
                let w = ws * pa;
                if w == 0.0 {
                    continue;
                }
                for (n, p) in next.iter_mut().zip(spec.next_dist(s, a)) {
                    *n += w * p;
                }
            }
        }
        per_time.push(next);
    }
    StateDistSchedule::new(per_time)
}

/// Backward recursion for `Q^pi` and `V^pi`, indexed by steps remaining.
pub fn exact_q(spec: &MdpSpec, pi: &Policy) -> Result<QTable> {
    pi.check_dims(spec)?;
    require_markov(pi, "Q values of a trajectory mixture")?;
    let (horizon, ns, na) = (spec.horizon, spec.num_states, spec.num_actions);
    let mut table = QTable::zeros(horizon, ns, na);
    let mut act = vec![0.0; na];
    for k in 1..=horizon {
        let t = steps_remaining(horizon, k);
        for s in 0..ns {
            let mut v = 0.0;
            pi.fill_action_distribution(s, t, &mut act);
            for (a, &pa) in act.iter().enumerate() {
                let future: f64 = spec
                    .next_dist(s, a)
                    .iter()
                    .enumerate()
                    .map(|(s2, p)| p * table.v(k - 1, s2))
                    .sum();
                let q = spec.cost(s, a) + future;
                let idx = table.q_index(k, s, a);
                table.q[idx] = q;
                v += pa * q;
            }
            table.v[(k - 1) * ns + s] = v;
        }
    }
    Ok(table)
}

/// `J = sum_t E_{s ~ d^t} E_{a ~ pi(.|s,t)} C(s, a)`.
pub fn policy_value_via_distributions(spec: &MdpSpec, pi: &Policy) -> Result<f64> {
    if let Policy::TrajectoryUniformMixture { members } = pi {
        pi.check_dims(spec)?;
        let total: f64 = members
            .iter()
            .map(|m| policy_value_via_distributions(spec, m))
            .sum::<Result<f64>>()?;
        return Ok(total / members.len() as f64);
    }
    let sched = exact_state_distributions(spec, pi)?;
    let mut act = vec![0.0; spec.num_actions];
    let mut j = 0.0;
    for t in 1..=spec.horizon {
        for (s, &ds) in sched.at(t).iter().enumerate() {
            if ds == 0.0 {
                continue;
            }
            pi.fill_action_distribution(s, t, &mut act);
            let c: f64 = act.iter().zip(&spec.costs[s]).map(|(p, c)| p * c).sum();
            j += ds * c;
        }
    }
    Ok(j)
}

/// `J = E_{s ~ d^1} V_T(s)`.
pub fn policy_value_via_values(spec: &MdpSpec, pi: &Policy) -> Result<f64> {
    if let Policy::TrajectoryUniformMixture { members } = pi {
        pi.check_dims(spec)?;
        let total: f64 = members
            .iter()
            .map(|m| policy_value_via_values(spec, m))
            .sum::<Result<f64>>()?;
        return Ok(total / members.len() as f64);
    }
    let q = exact_q(spec, pi)?;
    Ok(spec
        .initial_dist
        .iter()
        .enumerate()
        .map(|(s, p)| p * q.v(spec.horizon, s))
        .sum())
}

/// Total expected cost of `pi` over the horizon.
pub fn policy_value(spec: &MdpSpec, pi: &Policy) -> Result<f64> {
    let j = policy_value_via_distributions(spec, pi)?;
    debug_assert!({
        let jv = policy_value_via_values(spec, pi)?;
        (j - jv).abs() <= tolerance::VALIDATION
    });
    Ok(j)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceDifference {
    /// `J(pi) - J(pi')`.
    pub lhs: f64,
    /// `T E_{t, s ~ d^t_pi}[Q'(s, pi) - V'(s)]`.
    pub rhs_form1: f64,
    /// `T E_{t, s ~ d^t_pi'}[V(s) - Q(s, pi')]`.
    pub rhs_form2: f64,
}

/// Both forms of the performance difference identity between two Markov policies.
pub fn performance_difference(
    spec: &MdpSpec,
    pi: &Policy,
    pi_prime: &Policy,
) -> Result<PerformanceDifference> {
    require_markov(pi, "performance difference")?;
    require_markov(pi_prime, "performance difference")?;
    let horizon = spec.horizon;
    let lhs = policy_value(spec, pi)? - policy_value(spec, pi_prime)?;

    let d_pi = exact_state_distributions(spec, pi)?;
    let d_prime = exact_state_distributions(spec, pi_prime)?;
    let q_pi = exact_q(spec, pi)?;
    let q_prime = exact_q(spec, pi_prime)?;

    let mut act = vec![0.0; spec.num_actions];
    let mut form1 = 0.0;
    let mut form2 = 0.0;
    for t in 1..=horizon {
        let k = steps_remaining(horizon, t);
        for s in 0..spec.num_states {
            let w1 = d_pi.at(t)[s];
            if w1 != 0.0 {
                pi.fill_action_distribution(s, t, &mut act);
                form1 += w1 * (q_prime.q_under(k, s, &act) - q_prime.v(k, s));
            }
            let w2 = d_prime.at(t)[s];
            if w2 != 0.0 {
                pi_prime.fill_action_distribution(s, t, &mut act);
                form2 += w2 * (q_pi.v(k, s) - q_pi.q_under(k, s, &act));
            }
        }
    }
    // The uniform average over t times T is the plain sum over t.
    Ok(PerformanceDifference {
        lhs,
        rhs_form1: form1,
        rhs_form2: form2,
    })
}

/// `sum_x |p(x) - q(x)|`.
pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum())
}

/// Per-time L1 distances between two schedules.
pub fn l1_distance_schedule(p: &StateDistSchedule, q: &StateDistSchedule) -> Result<Vec<f64>> {
    if p.horizon() != q.horizon() {
        return Err(Error::ShapeMismatch {
            left: p.horizon(),
            right: q.horizon(),
        });
    }
    p.per_time
        .iter()
        .zip(&q.per_time)
        .map(|(a, b)| l1_distance(a, b))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `|E_p f - E_q f| <= (r / 2) ||p - q||_1` for `f` valued in `[lo, hi]`, `r = hi - lo`.
pub fn expectation_gap_bound_check(
    p: &[f64],
    q: &[f64],
    f: &[f64],
    lo: f64,
    hi: f64,
) -> Result<GapCheck> {
    if f.len() != p.len() {
        return Err(Error::ShapeMismatch {
            left: p.len(),
            right: f.len(),
        });
    }
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !(lo..=hi).contains(*v)) {
        return Err(Error::OutOfRange {
            index,
            value,
            lo,
            hi,
        });
    }
    let l1 = l1_distance(p, q)?;
    let ep: f64 = p.iter().zip(f).map(|(a, b)| a * b).sum();
    let eq: f64 = q.iter().zip(f).map(|(a, b)| a * b).sum();
    let gap = (ep - eq).abs();
    let bound = 0.5 * (hi - lo) * l1;
    Ok(GapCheck {
        gap,
        bound,
        holds: gap <= bound + tolerance::GAP_SLACK,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares the time-averaged state distributions of `learner` and of the
/// per-step mixture that follows `expert` with probability `beta`, against
/// `2 min(1, T beta)`.
pub fn mixing_l1_bound_check(
    spec: &MdpSpec,
    expert: &Policy,
    learner: &Policy,
    beta: f64,
) -> Result<MixingCheck> {
    let mixture = Policy::per_step_mixture(learner.clone(), expert.clone(), beta);
    let d_mix = exact_state_distributions(spec, &mixture)?;
    let d_learner = exact_state_distributions(spec, learner)?;
    let lhs = l1_distance(&d_mix.averaged, &d_learner.averaged)?;
    let bound = 2.0 * (spec.horizon as f64 * beta).min(1.0);
    Ok(MixingCheck {
        lhs,
        bound,
        holds: lhs <= bound + tolerance::BOUND_SLACK,
    })
}

/// Backward induction; ties go to the lowest action index.
pub fn finite_horizon_optimal_policy(spec: &MdpSpec) -> (Policy, QTable) {
    let (horizon, ns, na) = (spec.horizon, spec.num_states, spec.num_actions);
    let mut table = QTable::zeros(horizon, ns, na);
    let mut actions = vec![vec![0usize; horizon]; ns];
    for k in 1..=horizon {
        let t = steps_remaining(horizon, k);
        for (s, row) in actions.iter_mut().enumerate() {
            let mut best = (0usize, f64::INFINITY);
            for a in 0..na {
                let future: f64 = spec
                    .next_dist(s, a)
                    .iter()
                    .enumerate()
                    .map(|(s2, p)| p * table.v(k - 1, s2))
                    .sum();
                let q = spec.cost(s, a) + future;
                let idx = table.q_index(k, s, a);
                table.q[idx] = q;
                if q < best.1 {
                    best = (a, q);
                }
            }
            row[t - 1] = best.0;
            table.v[(k - 1) * ns + s] = best.1;
        }
    }
    let policy = crate::mdp::TabularPolicy {
        num_states: ns,
        num_actions: na,
        horizon,
        actions,
    };
    (policy.into(), table)
}

/// Action that minimizes `Q_k(s, .)`, lowest index on ties.
pub fn greedy_action(table: &QTable, k: usize, s: usize) -> usize {
    let row = table.q_row(k, s);
    let mut best = 0;
    for a in 1..row.len() {
        if row[a] < row[best] {
            best = a;
        }
    }
    best
}

/// Deterministic policy acting greedily on a Q table at every `(s, t)`.
pub fn greedy_policy(table: &QTable) -> Policy {
    crate::mdp::TabularPolicy::from_fn(table.num_states, table.num_actions, table.horizon, |s, t| {
        greedy_action(table, steps_remaining(table.horizon, t), s)
    })
    .into()
}
