//! Outer loops (expert cost-to-go imitation, no-regret policy iteration),
//! classification baselines, validation, and exact bound diagnostics.

mod bounds;
mod config;
mod learner;
mod loops;
mod report;
mod schedule;
mod validation;

pub use bounds::{exploration_mismatch, oracle_loss, theorem1_check, theorem2_diagnostics, theorem3_check};
pub use config::{FeatureKind, LearnerConfig, RunParams, ValidationMode};
pub use learner::RoundExample;
pub use loops::{behavior_cloning, dagger_classification, run_aggrevate, run_nrpi, RunOutcome};
pub use report::{Algorithm, BoundCheck, IterationRecord, RunReport, RunSummary, RUN_SCHEMA};
pub use schedule::BetaSchedule;
pub use validation::select_best_on_validation;
