//! Numeric tolerances shared by every module.

/// Probability-vector sums and stochastic-matrix rows during validation.
pub const VALIDATION: f64 = 1e-9;

/// Internal algebraic identities (mixture linearity, averaged schedules, action distributions).
pub const IDENTITY: f64 = 1e-12;

/// Slack used when comparing a bound's left side against its right side.
pub const BOUND_SLACK: f64 = 1e-9;

/// Slack for the lemma on bounded-function expectation gaps.
pub const GAP_SLACK: f64 = 1e-12;
