use crate::error::{Error, Result};
use crate::mdp::Policy;
use crate::sampling::{ClassificationExample, CostToGoExample};

/// Importance-weighted cost-sensitive loss of `pi` on partial-information data.
///
/// Each record carries the cost-to-go of one uniformly explored action, so
/// `|A| * pi(a_rec | s, t) * q` is an unbiased estimate of `E_{a ~ pi} Q(s, a)`.
/// For a deterministic policy this is `|A| * q` on matching records and 0 elsewhere.
pub fn empirical_cs_loss<'a, I>(examples: I, pi: &Policy) -> Result<f64>
where
    I: IntoIterator<Item = &'a CostToGoExample>,
{
    let na = pi.num_actions();
    let mut scratch = vec![0.0; na];
    let mut total = 0.0;
    let mut n = 0usize;
    for ex in examples {
        let p = match pi.deterministic_action(ex.state, ex.time) {
            Some(a) => f64::from(u8::from(a == ex.action)),
            None => {
                pi.fill_action_distribution(ex.state, ex.time, &mut scratch);
                scratch[ex.action]
            }
        };
        total += na as f64 * p * ex.q_estimate;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("cost-sensitive examples"));
    }
    Ok(total / n as f64)
}

/// Expected misclassification rate `1 - pi(a_expert | s, t)`.
pub fn zero_one_loss<'a, I>(examples: I, pi: &Policy) -> Result<f64>
where
    I: IntoIterator<Item = &'a ClassificationExample>,
{
    let mut scratch = vec![0.0; pi.num_actions()];
    let mut total = 0.0;
    let mut n = 0usize;
    for ex in examples {
        let p = match pi.deterministic_action(ex.state, ex.time) {
            Some(a) => f64::from(u8::from(a == ex.expert_action)),
            None => {
                pi.fill_action_distribution(ex.state, ex.time, &mut scratch);
                scratch[ex.expert_action]
            }
        };
        total += 1.0 - p;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("classification examples"));
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::TabularPolicy;

    fn ex(state: usize, time: usize, action: usize, q: f64) -> CostToGoExample {
        CostToGoExample {
            state,
            time,
            action,
            q_estimate: q,
        }
    }

    #[test]
    fn all_matching_records_scale_by_action_count() {
        let pi: Policy = TabularPolicy::from_fn(2, 3, 2, |_, _| 1).into();
        let data = vec![ex(0, 1, 1, 0.4), ex(1, 2, 1, 0.4)];
        let l = empirical_cs_loss(&data, &pi).unwrap();
        assert!((l - 3.0 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn no_matching_records_is_zero() {
        let pi: Policy = TabularPolicy::from_fn(2, 3, 2, |_, _| 2).into();
        let data = vec![ex(0, 1, 0, 0.4), ex(1, 2, 1, 0.9)];
        assert_eq!(empirical_cs_loss(&data, &pi).unwrap(), 0.0);
    }

    #[test]
    fn stochastic_policy_weights_by_probability() {
        let pi = Policy::uniform_random(1, 2, 1);
        let data = vec![ex(0, 1, 0, 1.0), ex(0, 1, 1, 0.0)];
        // 2 * 0.5 * 1 and 2 * 0.5 * 0, averaged.
        assert!((empirical_cs_loss(&data, &pi).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs_are_errors() {
        let pi = Policy::uniform_random(1, 2, 1);
        assert!(empirical_cs_loss(&[], &pi).is_err());
        assert!(zero_one_loss(&[], &pi).is_err());
    }

    #[test]
    fn zero_one_counts_mismatches() {
        let pi: Policy = TabularPolicy::from_fn(2, 2, 1, |s, _| s).into();
        let data = vec![
            ClassificationExample { state: 0, time: 1, expert_action: 0 },
            ClassificationExample { state: 1, time: 1, expert_action: 0 },
            ClassificationExample { state: 1, time: 1, expert_action: 1 },
            ClassificationExample { state: 0, time: 1, expert_action: 1 },
        ];
        assert_eq!(zero_one_loss(&data, &pi).unwrap(), 0.5);
    }
}
