//! Finite-horizon tabular MDP laboratory for interactive imitation learning
//! with expert cost-to-go (AggreVaTe) and no-regret policy iteration (NRPI).
//!
//! Every quantity the algorithms estimate from samples can also be computed
//! exactly here by backward/forward dynamic programming, which is what makes
//! the regret and performance bounds checkable at desk scale.
//!
//! Layout:
//! - [`mdp`]: specs, policies, exact state distributions and Q tables, lemma checks.
//! - [`sampling`]: trajectories, rollouts and the per-iteration data collection loops.
//! - [`learners`]: cost-sensitive losses, Follow-The-Leader, Hedge, linear Q regression.
//! - [`algorithms`]: the outer loops, baselines and bound diagnostics.
//! - [`envs`]: cliff corridor, two-road world, random MDPs.
//! - [`harness`]: config-driven runs, diagnosis and sweeps behind the `ctglab` binary.

pub mod algorithms;
pub mod envs;
pub mod error;
pub mod harness;
pub mod learners;
pub mod mdp;
pub mod sampling;
pub mod tolerance;

pub use error::{Error, Result};
pub use mdp::{MdpSpec, Policy, QTable, StateDistSchedule};
