//! Sample-access simulation: trajectories, rollouts and per-round data collection.

mod collect;
mod rng;
mod rollout;

pub use collect::{
    collect_aggrevate_batch, collect_classification_batch, collect_nrpi_batch, ClassificationExample,
    CostToGoExample, Exploration,
};
pub use rng::{sample_categorical, Purpose, RngStream, StreamKey};
pub use rollout::{
    estimate_cost_to_go, roll_in, sample_initial_state, sample_next_state, sample_return, sample_trajectory,
    ResolvedPolicy, Step,
};
