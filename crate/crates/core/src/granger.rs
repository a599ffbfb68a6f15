//! Linear Granger-causality baseline: OLS with Newey-West standard errors
//! and the t-test of the predictor coefficient.
//!
//! The regression is `target_{t+tau} = mu + beta * target_t +
//! alpha * predictor_t + eps_{t+tau}`; the null of no linear predictability
//! is `alpha = 0`, tested with `t = alpha_hat / se_hat` where the standard
//! error comes from the Bartlett-weighted HAC sandwich
//!
//! ```text
//! V = (X'X)^{-1} [ G_0 + sum_{j=1}^{m} w_j (G_j + G_j') ] (X'X)^{-1},
//! w_j = 1 - j/(m+1),   G_j = sum_{t>j} (x_t e_t)(x_{t-j} e_{t-j})'.
//! ```
//!
//! With `m = 0` this is the heteroskedasticity-robust (White) estimator.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// OLS output: coefficients in design-column order plus residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
}

// Cholesky factorization of a symmetric positive definite matrix, with a
// relative pivot tolerance so exactly collinear designs surface as
// SingularDesign instead of NaN coefficients.
fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let k = a.nrows();
    let scale = (0..k).map(|i| a[[i, i]].abs()).fold(0.0f64, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    let mut l = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for p in 0..j {
                sum -= l[[i, p]] * l[[j, p]];
            }
            if i == j {
                if sum <= tol {
                    return Err(Error::SingularDesign);
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[[i, p]] * y[p];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut sum = y[i];
        for p in (i + 1)..k {
            sum -= l[[p, i]] * x[p];
        }
        x[i] = sum / l[[i, i]];
    }
    x
}

fn gram(design: ArrayView2<'_, f64>) -> Array2<f64> {
    let k = design.ncols();
    let mut xtx = Array2::zeros((k, k));
    for row in design.rows() {
        for i in 0..k {
            for j in 0..=i {
                xtx[[i, j]] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            xtx[[i, j]] = xtx[[j, i]];
        }
    }
    xtx
}

/// Least-squares fit of `y` on the columns of `design`.
pub fn ols_fit(design: ArrayView2<'_, f64>, y: &[f64]) -> Result<OlsFit> {
    let n = design.nrows();
    let k = design.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    if n <= k {
        return Err(Error::SampleTooShort { needed: k + 1, actual: n });
    }
    let l = cholesky(&gram(design))?;
    let mut xty = vec![0.0; k];
    for (row, &yi) in design.rows().into_iter().zip(y) {
        for i in 0..k {
            xty[i] += row[i] * yi;
        }
    }
    let coefficients = cholesky_solve(&l, &xty);
    let mut fitted = vec![0.0; n];
    let mut residuals = vec![0.0; n];
    for (t, row) in design.rows().into_iter().enumerate() {
        let f: f64 = row.iter().zip(&coefficients).map(|(x, b)| x * b).sum();
        fitted[t] = f;
        residuals[t] = y[t] - f;
    }
    Ok(OlsFit { coefficients, residuals, fitted })
}

/// Bartlett weights `1 - j/(m+1)` for lags `j = 0..m`.
pub fn bartlett_weights(m: usize) -> Vec<f64> {
    (0..=m).map(|j| 1.0 - j as f64 / (m + 1) as f64).collect()
}

/// Newey-West HAC standard errors for an OLS fit.
pub fn newey_west_se(
    design: ArrayView2<'_, f64>,
    residuals: &[f64],
    m: usize,
) -> Result<Vec<f64>> {
    let n = design.nrows();
    let k = design.ncols();
    if residuals.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: residuals.len() });
    }
    if m >= n {
        return Err(Error::InvalidConfig(format!("lag truncation m={m} needs n > m, got n={n}")));
    }
    // Scores g_t = x_t * e_t.
    let mut scores = Array2::zeros((n, k));
    for (t, row) in design.rows().into_iter().enumerate() {
        for i in 0..k {
            scores[[t, i]] = row[i] * residuals[t];
        }
    }
    let weights = bartlett_weights(m);
    let mut meat = Array2::<f64>::zeros((k, k));
    for t in 0..n {
        for i in 0..k {
            for j in 0..k {
                meat[[i, j]] += scores[[t, i]] * scores[[t, j]];
            }
        }
    }
    for (j_lag, &w) in weights.iter().enumerate().skip(1) {
        for t in j_lag..n {
            for i in 0..k {
                for j in 0..k {
                    let cross = scores[[t, i]] * scores[[t - j_lag, j]];
                    meat[[i, j]] += w * cross;
                    meat[[j, i]] += w * cross;
                }
            }
        }
    }
    // Sandwich diagonal: V_rr = u' M u with u = (X'X)^{-1} e_r.
    let l = cholesky(&gram(design))?;
    let mut variance = vec![0.0f64; k];
    for r in 0..k {
        let mut unit = vec![0.0; k];
        unit[r] = 1.0;
        let u = cholesky_solve(&l, &unit);
        let mut quad = 0.0;
        for i in 0..k {
            for j in 0..k {
                quad += u[i] * meat[[i, j]] * u[j];
            }
        }
        variance[r] = quad;
    }
    Ok(variance.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Default lag truncation `floor(4 (n/100)^{2/9})`.
pub fn default_hac_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Result of the linear predictability test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HacRegressionResult {
    /// Intercept estimate.
    pub intercept: f64,
    /// Coefficient on the lagged target.
    pub target_coef: f64,
    /// Coefficient on the predictor (the tested one).
    pub predictor_coef: f64,
    /// HAC standard error of the predictor coefficient.
    pub predictor_se: f64,
    /// `t = predictor_coef / predictor_se`.
    pub t_stat: f64,
    /// Two-sided p-value against the standard normal reference.
    pub p_value: f64,
    /// Lag truncation used by the HAC estimator.
    pub hac_lags: usize,
    /// Observations entering the regression.
    pub n_obs: usize,
    /// Horizon of the regression.
    pub horizon: usize,
}

/// Regress `target_{t+tau}` on `(1, target_t, predictor_t)` and test the
/// predictor coefficient with a HAC t-statistic. `hac_lags = None` applies
/// the default truncation rule.
pub fn linear_granger_test(
    target: &[f64],
    predictor: &[f64],
    tau: usize,
    hac_lags: Option<usize>,
) -> Result<HacRegressionResult> {
    if predictor.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), actual: predictor.len() });
    }
    let len = target.len();
    if len < tau + 4 {
        return Err(Error::SampleTooShort { needed: tau + 4, actual: len });
    }
    let n = len - tau;
    let mut design = Array2::zeros((n, 3));
    let mut y = vec![0.0; n];
    for t in 0..n {
        design[[t, 0]] = 1.0;
        design[[t, 1]] = target[t];
        design[[t, 2]] = predictor[t];
        y[t] = target[t + tau];
    }
    let m = hac_lags.unwrap_or_else(|| default_hac_lags(n));
    let fit = ols_fit(design.view(), &y)?;
    let se = newey_west_se(design.view(), &fit.residuals, m)?;
    let alpha_hat = fit.coefficients[2];
    let alpha_se = se[2];
    if alpha_se <= 0.0 {
        return Err(Error::SingularDesign);
    }
    let t_stat = alpha_hat / alpha_se;
    let p_value = libm::erfc(t_stat.abs() / std::f64::consts::SQRT_2);
    Ok(HacRegressionResult {
        intercept: fit.coefficients[0],
        target_coef: fit.coefficients[1],
        predictor_coef: alpha_hat,
        predictor_se: alpha_se,
        t_stat,
        p_value,
        hac_lags: m,
        n_obs: n,
        horizon: tau,
    })
}
