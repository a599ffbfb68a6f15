//! Scalar test statistics from process values.
//!
//! The quadratic statistic averages the squared process over the
//! observations, `CvM_n = n^{-1} sum_t S_n(g_t)^2`, and the sup statistic
//! takes the maximum absolute value over the observations (the practical
//! form of the sup-norm functional). For the complex exponential family
//! the square is the squared modulus and the absolute value is the
//! modulus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::ProcessValues;

/// The pair of test statistics derived from one process evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub cvm: f64,
    pub ks: f64,
}

/// Cramer-von Mises type statistic: mean of squared process values.
pub fn cvm_stat(s: &ProcessValues) -> Result<f64> {
    if s.n_points() == 0 {
        return Err(Error::EmptyProcess);
    }
    Ok(s.points().map(|v| v.modulus_sq()).sum::<f64>() / s.n_points() as f64)
}

/// Kolmogorov-Smirnov type statistic: max absolute process value.
pub fn ks_stat(s: &ProcessValues) -> Result<f64> {
    if s.n_points() == 0 {
        return Err(Error::EmptyProcess);
    }
    Ok(s.points().map(|v| v.modulus()).fold(0.0, f64::max))
}

/// Both statistics at once.
pub fn compute_statistics(s: &ProcessValues) -> Result<StatisticValue> {
    Ok(StatisticValue { cvm: cvm_stat(s)?, ks: ks_stat(s)? })
}
