//! MDP description, policies, and exact (non-sampled) evaluation.

mod exact;
mod policy;
mod spec;

pub use exact::{
    exact_q, exact_state_distributions, expectation_gap_bound_check, finite_horizon_optimal_policy,
    greedy_action, greedy_policy, l1_distance, l1_distance_schedule, mixing_l1_bound_check,
    performance_difference, policy_value, policy_value_via_distributions, policy_value_via_values,
    steps_remaining, GapCheck, MixingCheck, PerformanceDifference, QTable, StateDistSchedule,
};
pub use policy::{Policy, StochasticPolicy, TabularPolicy};
pub use spec::{validate_mdp, MdpSpec, ValidationReport, Violation};
