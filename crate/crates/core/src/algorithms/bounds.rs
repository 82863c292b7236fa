use std::collections::BTreeMap;

use crate::algorithms::{BetaSchedule, BoundCheck};
use crate::error::{Error, Result};
use crate::learners::{cell_means, mean_squared_loss, AggregatedDataset, FinitePolicyClass, LeastSquaresAccumulator};
use crate::mdp::{
    exact_q, exact_state_distributions, l1_distance, policy_value, steps_remaining, MdpSpec, Policy, QTable,
    StateDistSchedule,
};
use crate::sampling::CostToGoExample;
use crate::tolerance;

/// `(1/T) sum_t sum_s d_t(s) sum_a pi(a | s, t) Q_{T - t + 1}(s, a)`.
pub fn oracle_loss(d: &StateDistSchedule, q: &QTable, pi: &Policy) -> f64 {
    let horizon = q.horizon;
    let mut act = vec![0.0; q.num_actions];
    let mut total = 0.0;
    for t in 1..=horizon {
        let k = steps_remaining(horizon, t);
        for (s, &w) in d.at(t).iter().enumerate() {
            if w != 0.0 {
                pi.fill_action_distribution(s, t, &mut act);
                total += w * q.q_under(k, s, &act);
            }
        }
    }
    total / horizon as f64
}

/// `(1/T) sum_t sum_s d_t(s) [Q_{T-t+1}(s, pi) - min_a Q_{T-t+1}(s, a)]`.
fn oracle_class_regret(d: &StateDistSchedule, q: &QTable, pi: &Policy) -> f64 {
    let horizon = q.horizon;
    let mut act = vec![0.0; q.num_actions];
    let mut total = 0.0;
    for t in 1..=horizon {
        let k = steps_remaining(horizon, t);
        for (s, &w) in d.at(t).iter().enumerate() {
            if w != 0.0 {
                pi.fill_action_distribution(s, t, &mut act);
                total += w * (q.q_under(k, s, &act) - q.min_q(k, s));
            }
        }
    }
    total / horizon as f64
}

/// `(1/N)[sum_i losses[i][played] - min_k sum_i losses[i][k]]`.
fn exact_regret(played_losses: &[f64], member_losses: &[Vec<f64>]) -> (f64, usize) {
    let n = played_losses.len() as f64;
    let k = member_losses[0].len();
    let totals: Vec<f64> = (0..k).map(|j| member_losses.iter().map(|r| r[j]).sum()).collect();
    let best = crate::learners::class::argmin_by(k, |j| totals[j]);
    ((played_losses.iter().sum::<f64>() - totals[best]) / n, best)
}

fn mean_value(spec: &MdpSpec, played: &[Policy]) -> Result<f64> {
    if played.is_empty() {
        return Err(Error::Empty("played policies"));
    }
    let total = played.iter().map(|p| policy_value(spec, p)).sum::<Result<f64>>()?;
    Ok(total / played.len() as f64)
}

fn check(name: &str, lhs: f64, rhs: f64, components: BTreeMap<String, f64>) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        lhs,
        rhs,
        holds: lhs <= rhs + tolerance::BOUND_SLACK,
        components,
    }
}

/// Exact finite-class guarantee for expert cost-to-go imitation:
///
/// `J(mix) - J(expert) <= T (eps_class + eps_regret) + (2 T Q*_max / N)[n_beta + T sum_{i > n_beta} beta_i]`
///
/// with both epsilon terms computed from exact state distributions of the
/// per-step mixtures and the expert's exact Q table.
pub fn theorem1_check(
    spec: &MdpSpec,
    expert: &Policy,
    class: &FinitePolicyClass,
    played: &[Policy],
    schedule: BetaSchedule,
) -> Result<BoundCheck> {
    if played.is_empty() {
        return Err(Error::Empty("played policies"));
    }
    class.check_dims(spec)?;
    let n = played.len();
    let horizon = spec.horizon;
    let q_star = exact_q(spec, expert)?;
    let q_star_max = q_star.max_q();

    let mut played_losses = Vec::with_capacity(n);
    let mut member_losses = Vec::with_capacity(n);
    let mut class_regret = vec![0.0; class.len()];
    for (i, pi_hat) in played.iter().enumerate() {
        let mixture = Policy::per_step_mixture(pi_hat.clone(), expert.clone(), schedule.beta(i + 1));
        let d = exact_state_distributions(spec, &mixture)?;
        played_losses.push(oracle_loss(&d, &q_star, pi_hat));
        member_losses.push(class.members.iter().map(|m| oracle_loss(&d, &q_star, m)).collect::<Vec<_>>());
        for (acc, m) in class_regret.iter_mut().zip(&class.members) {
            *acc += oracle_class_regret(&d, &q_star, m) / n as f64;
        }
    }
    let eps_class = class_regret.iter().copied().fold(f64::INFINITY, f64::min);
    let (eps_regret, best_member) = exact_regret(&played_losses, &member_losses);
    let remainder = schedule.remainder(n, horizon, q_star_max);
    let t = horizon as f64;
    let lhs = mean_value(spec, played)? - policy_value(spec, expert)?;
    let rhs = t * (eps_class + eps_regret) + remainder;
    let components = BTreeMap::from([
        ("eps_class".to_string(), eps_class),
        ("eps_regret".to_string(), eps_regret),
        ("q_star_max".to_string(), q_star_max),
        ("n_beta".to_string(), schedule.n_beta(n, horizon) as f64),
        ("beta_tail_sum".to_string(), schedule.tail_sum(n, horizon)),
        ("remainder".to_string(), remainder),
        ("best_fixed_member".to_string(), best_member as f64),
    ]);
    Ok(check("theorem1", lhs, rhs, components))
}

/// Finite-sample guarantee for regression-based imitation, from logged
/// squared losses:
///
/// `J(mix) - J(expert) <= 2 sqrt(|A|) T sqrt(eps_class^ + eps_regret^ + 2 l_max sqrt(2 ln(1/delta) / (N m))) + remainder`
///
/// - `eps_regret^`: average online loss minus the best linear fit in hindsight.
/// - `eps_class^`: best linear fit minus the per-`(s, a, t)` cell-mean predictor.
/// - `l_max`: `max(T^2, largest observed squared loss)`.
pub fn theorem2_diagnostics(
    spec: &MdpSpec,
    expert: &Policy,
    played: &[Policy],
    data: &AggregatedDataset<CostToGoExample>,
    schedule: BetaSchedule,
    delta: f64,
) -> Result<BoundCheck> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let regs = played
        .iter()
        .map(|p| match p {
            Policy::LinearArgmin(r) => Ok(r),
            _ => Err(Error::Incompatible("regression diagnostics need a regression run".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let fm = regs.first().ok_or(Error::Empty("played policies"))?.feature_map;
    let n = data.num_rounds();
    if n == 0 || n != regs.len() {
        return Err(Error::MissingData("per-round regression data".into()));
    }

    let mut acc = LeastSquaresAccumulator::new(fm);
    data.rounds().iter().try_for_each(|r| acc.add(r))?;
    let fit = acc.solve(0.0)?;
    let means = cell_means(data.iter());
    let cell_loss = |batch: &[CostToGoExample]| -> f64 {
        batch
            .iter()
            .map(|e| (means[&(e.state, e.action, e.time)] - e.q_estimate).powi(2))
            .sum::<f64>()
            / batch.len() as f64
    };

    let mut online = 0.0;
    let mut fitted = 0.0;
    let mut cell = 0.0;
    let mut observed_max: f64 = 0.0;
    for (batch, reg) in data.rounds().iter().zip(&regs) {
        online += mean_squared_loss(reg, batch)? / n as f64;
        fitted += mean_squared_loss(&fit, batch)? / n as f64;
        cell += cell_loss(batch) / n as f64;
        for e in batch {
            for r in [*reg, &fit] {
                observed_max = observed_max.max((r.predict(e.state, e.action, e.time) - e.q_estimate).powi(2));
            }
        }
    }
    let eps_hat_regret = online - fitted;
    let eps_hat_class = fitted - cell;
    let t = spec.horizon as f64;
    let l_max = (t * t).max(observed_max);
    let m = data.len() as f64 / n as f64;
    let concentration = 2.0 * l_max * (2.0 * (1.0 / delta).ln() / (n as f64 * m)).sqrt();
    let q_star_max = exact_q(spec, expert)?.max_q();
    let remainder = schedule.remainder(n, spec.horizon, q_star_max);
    let inner = eps_hat_class + eps_hat_regret + concentration;
    let rhs = 2.0 * (spec.num_actions as f64).sqrt() * t * inner.max(0.0).sqrt() + remainder;
    let lhs = mean_value(spec, played)? - policy_value(spec, expert)?;
    let components = BTreeMap::from([
        ("eps_hat_class".to_string(), eps_hat_class),
        ("eps_hat_regret".to_string(), eps_hat_regret),
        ("l_max".to_string(), l_max),
        ("concentration".to_string(), concentration),
        ("delta".to_string(), delta),
        ("q_star_max".to_string(), q_star_max),
        ("remainder".to_string(), remainder),
        ("online_loss".to_string(), online),
        ("best_linear_loss".to_string(), fitted),
        ("cell_mean_loss".to_string(), cell),
    ]);
    Ok(check("theorem2", lhs, rhs, components))
}

/// `D(nu, pi') = (1/T) sum_t |nu_t - d^t_{pi'}|_1`.
pub fn exploration_mismatch(spec: &MdpSpec, nu: &StateDistSchedule, comparator: &Policy) -> Result<f64> {
    if nu.horizon() != spec.horizon {
        return Err(Error::DimensionMismatch(format!(
            "exploration schedule has horizon {}, MDP has {}",
            nu.horizon(),
            spec.horizon
        )));
    }
    let d = exact_state_distributions(spec, comparator)?;
    let total = nu
        .per_time
        .iter()
        .zip(&d.per_time)
        .map(|(a, b)| l1_distance(a, b))
        .sum::<Result<f64>>()?;
    Ok(total / spec.horizon as f64)
}

/// Exact guarantee for policy iteration against any comparator in the class:
///
/// `J(mix) - J(pi') <= T eps_regret + T Q_max D(nu, pi')`
///
/// with round losses `L_i(pi)` taken under `nu` and each played policy's own
/// exact Q table, and `Q_max` the largest of those Q values (at most `T`).
pub fn theorem3_check(
    spec: &MdpSpec,
    comparator: &Policy,
    class: &FinitePolicyClass,
    nu: &StateDistSchedule,
    played: &[Policy],
) -> Result<BoundCheck> {
    if played.is_empty() {
        return Err(Error::Empty("played policies"));
    }
    class.check_dims(spec)?;
    let mismatch = exploration_mismatch(spec, nu, comparator)?;
    let mut q_max: f64 = 0.0;
    let mut played_losses = Vec::with_capacity(played.len());
    let mut member_losses = Vec::with_capacity(played.len());
    for pi_hat in played {
        let q = exact_q(spec, pi_hat)?;
        q_max = q_max.max(q.max_q());
        played_losses.push(oracle_loss(nu, &q, pi_hat));
        member_losses.push(class.members.iter().map(|m| oracle_loss(nu, &q, m)).collect::<Vec<_>>());
    }
    let t = spec.horizon as f64;
    let q_max = q_max.min(spec.cost_to_go_cap());
    let (eps_regret, best_member) = exact_regret(&played_losses, &member_losses);
    let lhs = mean_value(spec, played)? - policy_value(spec, comparator)?;
    let mismatch_term = t * q_max * mismatch;
    let rhs = t * eps_regret + mismatch_term;
    let components = BTreeMap::from([
        ("eps_regret".to_string(), eps_regret),
        ("q_max".to_string(), q_max),
        ("mismatch".to_string(), mismatch),
        ("mismatch_term".to_string(), mismatch_term),
        ("best_fixed_member".to_string(), best_member as f64),
    ]);
    Ok(check("theorem3", lhs, rhs, components))
}
