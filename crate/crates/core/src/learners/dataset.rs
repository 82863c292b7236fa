use serde::{Deserialize, Serialize};

/// Round-indexed, append-only collection of example batches `D_1..D_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregatedDataset<E> {
    rounds: Vec<Vec<E>>,
}

impl<E> Default for AggregatedDataset<E> {
    fn default() -> Self {
        Self { rounds: Vec::new() }
    }
}

impl<E> AggregatedDataset<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_round(&mut self, batch: Vec<E>) {
        self.rounds.push(batch);
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[Vec<E>] {
        &self.rounds
    }

    /// Batch of round `i`, 0-based.
    pub fn round(&self, i: usize) -> &[E] {
        &self.rounds[i]
    }

    /// Size of the flattened view, `sum_i |D_i|`.
    pub fn len(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All examples, round by round.
    pub fn iter(&self) -> impl Iterator<Item = &E> + Clone + '_ {
        self.rounds.iter().flatten()
    }
}
