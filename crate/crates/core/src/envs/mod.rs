//! Benchmark environments: a slippery cliff corridor, a two-road world whose
//! policy class cannot follow the expert, and random MDPs for property tests.

mod cliff;
mod random;
mod two_road;

use serde::{Deserialize, Serialize};

use crate::learners::FinitePolicyClass;
use crate::mdp::{MdpSpec, Policy};

pub use cliff::{make_cliff_corridor, CliffCorridor, CliffParams};
pub use random::{make_random_mdp, random_policy_class, RandomMdpParams};
pub use two_road::{make_two_road, TwoRoad};

/// Action indices of the cliff corridor.
pub mod cliff_actions {
    pub use super::cliff::{DOWN, RIGHT, UP};
}

/// Version tag of the canonical environment definitions. Bumped whenever
/// geometry or costs change, since acceptance thresholds depend on them.
pub const ENV_VERSION: &str = "1";

/// A generated problem: the MDP, the demonstrator and a finite policy class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub name: String,
    pub spec: MdpSpec,
    pub expert: Policy,
    pub class: FinitePolicyClass,
}
