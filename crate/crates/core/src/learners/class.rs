use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{empirical_cs_loss, AggregatedDataset};
use crate::mdp::{MdpSpec, Policy};
use crate::sampling::{sample_categorical, CostToGoExample};
use crate::tolerance;

/// A finite hypothesis class with exponential-weights state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinitePolicyClass {
    pub members: Vec<Policy>,
    pub names: Vec<String>,
    pub weights: Vec<f64>,
}

impl FinitePolicyClass {
    /// Uniform weights over `members`.
    pub fn new(members: Vec<Policy>, names: Vec<String>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty("policy class"));
        }
        if names.len() != members.len() {
            return Err(Error::ShapeMismatch {
                left: members.len(),
                right: names.len(),
            });
        }
        let k = members.len();
        Ok(Self {
            members,
            names,
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Members named `member_0`, `member_1`, ...
    pub fn unnamed(members: Vec<Policy>) -> Result<Self> {
        let names = (0..members.len()).map(|i| format!("member_{i}")).collect();
        Self::new(members, names)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &Policy {
        &self.members[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Same class with member `i` dropped and weights reset to uniform.
    pub fn without(&self, i: usize) -> Result<Self> {
        let mut members = self.members.clone();
        let mut names = self.names.clone();
        if i >= members.len() {
            return Err(Error::InvalidArgument(format!("no member {i} in a class of {}", members.len())));
        }
        members.remove(i);
        names.remove(i);
        Self::new(members, names)
    }

    pub fn check_dims(&self, spec: &MdpSpec) -> Result<()> {
        self.members.iter().try_for_each(|m| m.check_dims(spec))?;
        let sum: f64 = self.weights.iter().sum();
        if self.weights.len() != self.members.len() || (sum - 1.0).abs() > tolerance::IDENTITY {
            return Err(Error::InvalidArgument("class weights are not a distribution over members".into()));
        }
        Ok(())
    }

    /// Draws a member index from the current weights.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_categorical(&self.weights, rng)
    }

    /// Index of the largest weight, lowest index on ties.
    pub fn heaviest(&self) -> usize {
        argmin_by(self.len(), |i| -self.weights[i])
    }
}

/// Lowest index minimizing `f`.
pub(crate) fn argmin_by(n: usize, mut f: impl FnMut(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..n {
        let v = f(i);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Follow-The-Leader over an arbitrary loss: the lowest-index minimizer.
pub fn ftl_select_by(class: &FinitePolicyClass, mut loss: impl FnMut(&Policy) -> Result<f64>) -> Result<usize> {
    let losses = class.members.iter().map(&mut loss).collect::<Result<Vec<_>>>()?;
    Ok(argmin_by(losses.len(), |i| losses[i]))
}

/// Member with the smallest cost-sensitive loss on the whole aggregated dataset.
pub fn ftl_select(dataset: &AggregatedDataset<CostToGoExample>, class: &FinitePolicyClass) -> Result<usize> {
    if dataset.is_empty() {
        return Err(Error::Empty("aggregated dataset"));
    }
    ftl_select_by(class, |pi| empirical_cs_loss(dataset.iter(), pi))
}

/// Exponential weights: `w'_k ∝ w_k exp(-eta * loss_k)`.
///
/// Losses are shifted by their minimum before exponentiating, which leaves the
/// normalized result unchanged and avoids underflow.
pub fn hedge_update(weights: &[f64], round_losses: &[f64], eta: f64) -> Result<Vec<f64>> {
    if weights.len() != round_losses.len() {
        return Err(Error::ShapeMismatch {
            left: weights.len(),
            right: round_losses.len(),
        });
    }
    if weights.is_empty() {
        return Err(Error::Empty("hedge weights"));
    }
    if let Some(bad) = round_losses.iter().find(|l| !l.is_finite()) {
        return Err(Error::NonFinite(format!("hedge round loss {bad}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidArgument(format!("hedge learning rate must be positive, got {eta}")));
    }
    let lo = round_losses.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out: Vec<f64> = weights
        .iter()
        .zip(round_losses)
        .map(|(w, l)| w * (-eta * (l - lo)).exp())
        .collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|w| *w /= z);
    Ok(out)
}

/// `sqrt(8 ln K / N) / loss_range`, the rate that balances the two terms of
/// the exponential-weights regret bound over a known number of rounds.
pub fn default_hedge_eta(num_members: usize, rounds: usize, loss_range: f64) -> f64 {
    let k = num_members.max(2) as f64;
    (8.0 * k.ln() / rounds.max(1) as f64).sqrt() / loss_range
}
