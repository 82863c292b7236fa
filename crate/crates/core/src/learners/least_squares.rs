use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::learners::{FeatureMap, LinearQRegressor};
use crate::sampling::CostToGoExample;

/// Running normal equations `G = sum f f^T`, `b = sum q f` over a growing dataset.
#[derive(Clone, Debug)]
pub struct LeastSquaresAccumulator {
    feature_map: FeatureMap,
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    count: usize,
}

impl LeastSquaresAccumulator {
    pub fn new(feature_map: FeatureMap) -> Self {
        let d = feature_map.dim();
        Self {
            feature_map,
            gram: DMatrix::zeros(d, d),
            rhs: DVector::zeros(d),
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, batch: &[CostToGoExample]) -> Result<()> {
        for ex in batch {
            self.feature_map.check_example(ex)?;
            let active = self.feature_map.active(ex.state, ex.action, ex.time);
            let idx = active.as_slice();
            for &i in idx {
                self.rhs[i] += ex.q_estimate;
                for &j in idx {
                    self.gram[(i, j)] += 1.0;
                }
            }
        }
        self.count += batch.len();
        Ok(())
    }

    /// Minimizer of `(1/n) sum (w.f - q)^2 + ridge |w|^2`.
    ///
    /// With `ridge == 0` the minimum-norm minimizer is returned, via an SVD
    /// pseudo-inverse of the Gram matrix.
    pub fn solve(&self, ridge: f64) -> Result<LinearQRegressor> {
        if self.count == 0 {
            return Err(Error::Empty("least-squares data"));
        }
        if !(ridge.is_finite() && ridge >= 0.0) {
            return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {ridge}")));
        }
        let n = self.count as f64;
        let w = if ridge > 0.0 {
            let mut a = &self.gram / n;
            for i in 0..a.nrows() {
                a[(i, i)] += ridge;
            }
            let b = &self.rhs / n;
            a.cholesky()
                .ok_or_else(|| Error::NonFinite("ridge system is not positive definite".into()))?
                .solve(&b)
        } else {
            let svd = self.gram.clone().svd(true, true);
            let scale = svd.singular_values.max().max(1.0);
            svd.solve(&self.rhs, 1e-10 * scale)
                .map_err(|e| Error::NonFinite(format!("least-squares solve failed: {e}")))?
        };
        LinearQRegressor::with_weights(self.feature_map, w.iter().copied().collect())
    }
}

/// Fits a linear regressor to every example at once.
pub fn fit_least_squares<'a, I>(examples: I, feature_map: FeatureMap, ridge: f64) -> Result<LinearQRegressor>
where
    I: IntoIterator<Item = &'a CostToGoExample>,
{
    let mut acc = LeastSquaresAccumulator::new(feature_map);
    let batch: Vec<CostToGoExample> = examples.into_iter().copied().collect();
    acc.add(&batch)?;
    acc.solve(ridge)
}

/// Mean squared loss of `reg` over a stream of examples.
pub fn mean_squared_loss<'a, I>(reg: &LinearQRegressor, examples: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a CostToGoExample>,
{
    let mut total = 0.0;
    let mut n = 0usize;
    for ex in examples {
        reg.feature_map.check_example(ex)?;
        let r = reg.predict(ex.state, ex.action, ex.time) - ex.q_estimate;
        total += r * r;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("regression examples"));
    }
    Ok(total / n as f64)
}

/// Per-`(s, a, t)` sample mean of the targets: the unrestricted squared-loss
/// minimizer on the data.
pub fn cell_means<'a, I>(examples: I) -> BTreeMap<(usize, usize, usize), f64>
where
    I: IntoIterator<Item = &'a CostToGoExample>,
{
    let mut sums: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for ex in examples {
        let e = sums.entry((ex.state, ex.action, ex.time)).or_insert((0.0, 0));
        e.0 += ex.q_estimate;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// Mean squared loss of the cell-mean predictor on the same examples.
pub fn cell_mean_loss<'a, I>(examples: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a CostToGoExample> + Clone,
{
    let means = cell_means(examples.clone());
    let mut total = 0.0;
    let mut n = 0usize;
    for ex in examples {
        let r = means[&(ex.state, ex.action, ex.time)] - ex.q_estimate;
        total += r * r;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("regression examples"));
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(state: usize, time: usize, action: usize, q: f64) -> CostToGoExample {
        CostToGoExample {
            state,
            time,
            action,
            q_estimate: q,
        }
    }

    #[test]
    fn joint_one_hot_fit_reproduces_cell_means() {
        let data = vec![ex(0, 1, 0, 1.0), ex(0, 1, 0, 3.0), ex(1, 2, 1, 0.5), ex(1, 1, 1, 0.25)];
        let fm = FeatureMap::state_action_time(2, 2, 2);
        let reg = fit_least_squares(&data, fm, 0.0).unwrap();
        assert!((reg.predict(0, 0, 1) - 2.0).abs() < 1e-12);
        assert!((reg.predict(1, 1, 2) - 0.5).abs() < 1e-12);
        // Unseen cells stay at zero under the minimum-norm solution.
        assert!(reg.predict(0, 1, 2).abs() < 1e-12);
        let ls = mean_squared_loss(&reg, &data).unwrap();
        let cm = cell_mean_loss(&data).unwrap();
        assert!((ls - cm).abs() < 1e-12);
        assert!((cm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn additive_features_match_normal_equations() {
        // Targets generated by an additive model are fit exactly.
        let fm = FeatureMap::state_action_plus_time(2, 2, 3);
        let truth: Vec<f64> = (0..fm.dim()).map(|i| 0.1 * i as f64).collect();
        let truth = LinearQRegressor::with_weights(fm, truth).unwrap();
        let mut data = Vec::new();
        for s in 0..2 {
            for a in 0..2 {
                for t in 1..=3 {
                    data.push(ex(s, t, a, truth.predict(s, a, t)));
                }
            }
        }
        let reg = fit_least_squares(&data, fm, 0.0).unwrap();
        for e in &data {
            assert!((reg.predict(e.state, e.action, e.time) - e.q_estimate).abs() < 1e-9);
        }
        assert!(mean_squared_loss(&reg, &data).unwrap() < 1e-18);
    }

    #[test]
    fn ridge_shrinks_toward_zero() {
        let data = vec![ex(0, 1, 0, 1.0)];
        let fm = FeatureMap::state_action_time(1, 1, 1);
        let reg = fit_least_squares(&data, fm, 1.0).unwrap();
        assert!((reg.predict(0, 0, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn incremental_accumulation_equals_batch_fit() {
        let fm = FeatureMap::state_action_plus_time(2, 2, 2);
        let a = vec![ex(0, 1, 0, 1.0), ex(1, 2, 1, 0.3)];
        let b = vec![ex(0, 2, 1, 0.7), ex(1, 1, 0, 0.2), ex(0, 1, 0, 0.8)];
        let mut acc = LeastSquaresAccumulator::new(fm);
        acc.add(&a).unwrap();
        acc.add(&b).unwrap();
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        let one = acc.solve(0.0).unwrap();
        let two = fit_least_squares(&all, fm, 0.0).unwrap();
        for (x, y) in one.weights.iter().zip(&two.weights) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
