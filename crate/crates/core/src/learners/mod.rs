//! Online learners: cost-sensitive losses, Follow-The-Leader, exponential
//! weights, and linear cost-to-go regression.

pub(crate) mod class;
mod dataset;
mod least_squares;
mod loss;
mod regressor;
mod regret;

pub use class::{default_hedge_eta, ftl_select, ftl_select_by, hedge_update, FinitePolicyClass};
pub use dataset::AggregatedDataset;
pub use least_squares::{cell_mean_loss, cell_means, fit_least_squares, mean_squared_loss, LeastSquaresAccumulator};
pub use loss::{empirical_cs_loss, zero_one_loss};
pub use regressor::{argmax_policy, ogd_regression_update, ActiveSet, FeatureMap, LinearQRegressor};
pub use regret::{regret_terms, RegretTerms};
