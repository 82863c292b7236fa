use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::class::argmin_by;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTerms {
    pub avg_learner_loss: f64,
    pub best_fixed_loss: f64,
    pub best_fixed_index: usize,
    pub eps_regret: f64,
}

/// Average regret against the best *fixed* member in hindsight.
///
/// `chosen[i]` is the loss charged to the learner in round `i`;
/// `member_losses[i][k]` is member `k`'s loss in that round.
pub fn regret_terms(chosen: &[f64], member_losses: &[Vec<f64>]) -> Result<RegretTerms> {
    if chosen.is_empty() {
        return Err(Error::Empty("regret rounds"));
    }
    if chosen.len() != member_losses.len() {
        return Err(Error::ShapeMismatch {
            left: chosen.len(),
            right: member_losses.len(),
        });
    }
    let k = member_losses[0].len();
    if k == 0 {
        return Err(Error::Empty("regret members"));
    }
    if let Some(row) = member_losses.iter().find(|r| r.len() != k) {
        return Err(Error::ShapeMismatch { left: k, right: row.len() });
    }
    let n = chosen.len() as f64;
    let mut totals = vec![0.0; k];
    for row in member_losses {
        for (acc, l) in totals.iter_mut().zip(row) {
            *acc += l;
        }
    }
    let best = argmin_by(k, |j| totals[j]);
    let avg_learner_loss = chosen.iter().sum::<f64>() / n;
    let best_fixed_loss = totals[best] / n;
    Ok(RegretTerms {
        avg_learner_loss,
        best_fixed_loss,
        best_fixed_index: best,
        eps_regret: avg_learner_loss - best_fixed_loss,
    })
}
