use rayon::prelude::*;

use crate::algorithms::ValidationMode;
use crate::error::{Error, Result};
use crate::learners::class::argmin_by;
use crate::mdp::{policy_value, MdpSpec, Policy};
use crate::sampling::{sample_return, Purpose, RngStream, StreamKey};

/// Scores every candidate and returns `(winner, scores)`; earliest index wins ties.
pub fn select_best_on_validation(
    policies: &[Policy],
    spec: &MdpSpec,
    mode: ValidationMode,
    seed: u64,
) -> Result<(usize, Vec<f64>)> {
    if policies.is_empty() {
        return Err(Error::Empty("validation candidates"));
    }
    let scores = match mode {
        ValidationMode::Oracle => policies.iter().map(|p| policy_value(spec, p)).collect::<Result<Vec<_>>>()?,
        ValidationMode::MonteCarlo { budget } => {
            if budget == 0 {
                return Err(Error::InvalidArgument("Monte-Carlo validation needs a positive budget".into()));
            }
            policies.iter().try_for_each(|p| p.check_dims(spec))?;
            policies
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let total: f64 = (0..budget)
                        .into_par_iter()
                        .map(|j| {
                            let mut rng = RngStream::new(seed, StreamKey::new(Purpose::Validation, k, j));
                            sample_return(spec, p, &mut rng)
                        })
                        .collect::<Vec<f64>>()
                        .iter()
                        .sum();
                    total / budget as f64
                })
                .collect()
        }
    };
    Ok((argmin_by(scores.len(), |i| scores[i]), scores))
}
