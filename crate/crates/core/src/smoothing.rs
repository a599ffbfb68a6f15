//! Kernel functions, bandwidth rules, and leave-one-out Nadaraya-Watson
//! estimators of the conditioning density `f_W` and the conditional CDFs
//! `F_{Y|W}` and `F_{Z|W}`.
//!
//! The kernel is a product of univariate standard normal densities,
//!
//! ```text
//! K(u) = prod_j (2*pi)^{-1/2} exp(-u_j^2 / 2),
//! ```
//!
//! and the leave-one-out estimators at observation `t` exclude the own
//! observation from every sum:
//!
//! ```text
//! f_hat(W_t)        = [(n-1) h^{d_w}]^{-1} sum_{s != t} K((W_t - W_s)/h)
//! F_hat(z | W_t)    = sum_{s != t} K_ts 1(Z_s <= z) / sum_{s != t} K_ts
//! ```

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::TimeSeriesSample;

/// `(2*pi)^{-1/2}`, the standard normal density at zero.
pub const GAUSSIAN_NORM: f64 = 0.3989422804014327;

/// Supported kernel families. Higher-order kernels are an extension hook;
/// every reported experiment uses the order-2 Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
}

/// A product kernel of a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub dim: usize,
}

#[inline]
fn gaussian(x: f64) -> f64 {
    // Underflows to exactly 0 for |x| beyond ~38.6; negligible additively.
    GAUSSIAN_NORM * (-0.5 * x * x).exp()
}

impl KernelSpec {
    pub fn gaussian(dim: usize) -> Self {
        Self { family: KernelFamily::Gaussian, dim }
    }

    /// Evaluate `K(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: u.len() });
        }
        Ok(u.iter().map(|&x| gaussian(x)).product())
    }

    /// `K(0) = (2*pi)^{-d/2}`, the kernel's maximum.
    pub fn at_zero(&self) -> f64 {
        GAUSSIAN_NORM.powi(self.dim as i32)
    }
}

/// Bandwidth selection rules, all of the form `h ~ n^{-1/3.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `h = c * n^{-1/3.5}` for a fixed constant `c > 0`.
    FixedC { c: f64 },
    /// `h = 1.06 * Std(W) * n^{-1/3.5}`, using the average per-column
    /// sample standard deviation of the conditioning block when `d_w > 1`.
    DataDriven,
}

fn mean_column_std(w: ArrayView2<'_, f64>) -> f64 {
    let n = w.nrows() as f64;
    let mut total = 0.0;
    for col in w.columns() {
        let mean = col.sum() / n;
        let ss: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
        total += (ss / (n - 1.0)).sqrt();
    }
    total / w.ncols() as f64
}

/// Compute the bandwidth for a sample under the given rule.
pub fn bandwidth(rule: &BandwidthRule, sample: &TimeSeriesSample) -> Result<f64> {
    sample.require_rows(2)?;
    let rate = (sample.n() as f64).powf(-1.0 / 3.5);
    match *rule {
        BandwidthRule::FixedC { c } => {
            if c <= 0.0 || !c.is_finite() {
                return Err(Error::InvalidConfig(format!("bandwidth constant c={c} must be positive")));
            }
            Ok(c * rate)
        }
        BandwidthRule::DataDriven => {
            let sd = mean_column_std(sample.w());
            if sd <= 0.0 {
                return Err(Error::DegenerateBandwidth);
            }
            Ok(1.06 * sd * rate)
        }
    }
}

/// The `n x n` matrix of kernel weights `M[t][s] = K((W_t - W_s)/h)`.
///
/// Symmetric by kernel symmetry, with `K(0)` on the diagonal. This is the
/// shared building block for the density, the conditional CDFs, and the
/// empirical process; it is computed once per `(W, h)` pair.
pub fn kernel_weight_matrix(
    w: ArrayView2<'_, f64>,
    h: f64,
    spec: &KernelSpec,
) -> Result<Array2<f64>> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidConfig(format!("bandwidth h={h} must be positive")));
    }
    if spec.dim != w.ncols() {
        return Err(Error::DimensionMismatch { expected: w.ncols(), actual: spec.dim });
    }
    let n = w.nrows();
    let mut m = Array2::zeros((n, n));
    let k0 = spec.at_zero();
    for t in 0..n {
        m[[t, t]] = k0;
        let wt = w.row(t);
        for s in (t + 1)..n {
            let ws = w.row(s);
            let mut k = 1.0;
            for j in 0..spec.dim {
                k *= gaussian((wt[j] - ws[j]) / h);
            }
            m[[t, s]] = k;
            m[[s, t]] = k;
        }
    }
    Ok(m)
}

/// Sum of row `t` of the weight matrix with the own observation excluded.
pub fn loo_row_sum(weights: &Array2<f64>, t: usize) -> f64 {
    let mut sum = 0.0;
    for (s, &v) in weights.row(t).iter().enumerate() {
        if s != t {
            sum += v;
        }
    }
    sum
}

/// Leave-one-out density estimate `f_hat(W_t)`.
pub fn loo_density(weights: &Array2<f64>, h: f64, d_w: usize, t: usize) -> f64 {
    let n = weights.nrows();
    loo_row_sum(weights, t) / ((n - 1) as f64 * h.powi(d_w as i32))
}

/// Leave-one-out conditional CDF estimate at observation `t`, given the
/// indicator column `indicators[s] = 1(Z_s <= z)`.
///
/// The ratio form is only needed on the bootstrap path; the test statistic
/// itself uses the division-free double sum. A zero leave-one-out weight
/// sum (isolated point, tiny bandwidth) is a structured error rather than
/// a clamped value, because silently clamping corrupts the residuals.
pub fn loo_cond_cdf(weights: &Array2<f64>, indicators: &[bool], t: usize) -> Result<f64> {
    let n = weights.nrows();
    if indicators.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: indicators.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let row = weights.row(t);
    for s in 0..n {
        if s == t {
            continue;
        }
        let k = row[s];
        den += k;
        if indicators[s] {
            num += k;
        }
    }
    if den <= 0.0 {
        return Err(Error::DegenerateNeighborhood { index: t });
    }
    // Guard the ratio against last-ulp excursions outside [0, 1].
    Ok((num / den).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use ndarray::array;
    use proptest::prelude::*;

    fn univariate(w: &[f64]) -> TimeSeriesSample {
        let y = vec![0.0; w.len().max(2)];
        TimeSeriesSample::from_univariate(w, &y[..w.len()], &y[..w.len()]).unwrap()
    }

    #[test]
    fn kernel_matches_analytic_values() {
        let k1 = KernelSpec::gaussian(1);
        assert!((k1.eval(&[0.0]).unwrap() - 0.3989423).abs() < 1e-7);
        assert!((k1.eval(&[1.0]).unwrap() - 0.2419707).abs() < 1e-7);
        let k2 = KernelSpec::gaussian(2);
        assert!((k2.eval(&[0.0, 0.0]).unwrap() - 0.1591549).abs() < 1e-7);
    }

    #[test]
    fn kernel_rejects_dimension_mismatch() {
        let k = KernelSpec::gaussian(2);
        assert!(matches!(
            k.eval(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn fixed_bandwidth_matches_high_precision_oracle() {
        // Independent route: n^{-1/3.5} = exp(-2 ln(n) / 7).
        let sample = univariate(&vec![0.0; 100].iter().enumerate().map(|(i, _)| i as f64).collect::<Vec<_>>());
        let oracle = (-(100f64).ln() * 2.0 / 7.0).exp();
        let h1 = bandwidth(&BandwidthRule::FixedC { c: 1.0 }, &sample).unwrap();
        assert!((h1 - oracle).abs() < 1e-12);
        assert!((h1 - 0.2682696).abs() < 1e-6);
        let h_half = bandwidth(&BandwidthRule::FixedC { c: 0.5 }, &sample).unwrap();
        assert!((h_half - 0.5 * oracle).abs() < 1e-15);
        assert!((h_half - 0.1341348).abs() < 1e-6);
    }

    #[test]
    fn data_driven_bandwidth_rejects_constant_series() {
        let sample = univariate(&[3.0, 3.0, 3.0, 3.0]);
        assert_eq!(bandwidth(&BandwidthRule::DataDriven, &sample), Err(Error::DegenerateBandwidth));
    }

    #[test]
    fn data_driven_bandwidth_uses_sample_std() {
        let w: Vec<f64> = (0..50).map(|i| (i as f64) * 0.1).collect();
        let sample = univariate(&w);
        let n = 50f64;
        let mean = w.iter().sum::<f64>() / n;
        let sd = (w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        let h = bandwidth(&BandwidthRule::DataDriven, &sample).unwrap();
        assert!((h - 1.06 * sd * n.powf(-1.0 / 3.5)).abs() < 1e-12);
    }

    #[test]
    fn weight_matrix_identical_rows() {
        let w = array![[0.0], [0.0]];
        let m = kernel_weight_matrix(w.view(), 1.0, &KernelSpec::gaussian(1)).unwrap();
        for &v in m.iter() {
            assert!((v - 0.3989423).abs() < 1e-7);
        }
    }

    #[test]
    fn weight_matrix_underflows_to_zero_at_huge_distance() {
        let w = array![[0.0], [100.0]];
        let m = kernel_weight_matrix(w.view(), 1.0, &KernelSpec::gaussian(1)).unwrap();
        assert_eq!(m[[0, 1]], 0.0);
        assert_eq!(m[[0, 0]], KernelSpec::gaussian(1).at_zero());
    }

    #[test]
    fn loo_density_hand_oracle() {
        // n=2, identical points, h=1: single-term sum K(0)/1.
        let w = array![[0.0], [0.0]];
        let m = kernel_weight_matrix(w.view(), 1.0, &KernelSpec::gaussian(1)).unwrap();
        assert!((loo_density(&m, 1.0, 1, 0) - 0.3989423).abs() < 1e-7);
        // n=3 identical: 2*K(0)/2.
        let w3 = array![[1.0], [1.0], [1.0]];
        let m3 = kernel_weight_matrix(w3.view(), 1.0, &KernelSpec::gaussian(1)).unwrap();
        assert!((loo_density(&m3, 1.0, 1, 1) - 0.3989423).abs() < 1e-7);
    }

    #[test]
    fn loo_cond_cdf_extremes_and_hand_case() {
        let w = array![[0.0], [0.0]];
        let m = kernel_weight_matrix(w.view(), 1.0, &KernelSpec::gaussian(1)).unwrap();
        // z >= max(Z): all indicators set.
        assert_eq!(loo_cond_cdf(&m, &[true, true], 0).unwrap(), 1.0);
        // z < min(Z).
        assert_eq!(loo_cond_cdf(&m, &[false, false], 0).unwrap(), 0.0);
        // Z = (0, 1), threshold 0.5 at t=0: the single neighbor Z_1 = 1 exceeds it.
        assert_eq!(loo_cond_cdf(&m, &[true, false], 0).unwrap(), 0.0);
    }

    #[test]
    fn loo_cond_cdf_detects_degenerate_neighborhood() {
        // Rows far enough apart that every off-diagonal weight underflows.
        let w = array![[0.0], [1.0e6]];
        let m = kernel_weight_matrix(w.view(), 1e-3, &KernelSpec::gaussian(1)).unwrap();
        assert_eq!(
            loo_cond_cdf(&m, &[true, true], 0),
            Err(Error::DegenerateNeighborhood { index: 0 })
        );
    }

    proptest! {
        #[test]
        fn weight_matrix_is_exactly_symmetric(
            vals in proptest::collection::vec(-10.0f64..10.0, 2..20),
            h in 0.05f64..3.0,
        ) {
            let sample = univariate(&vals);
            let m = kernel_weight_matrix(sample.w(), h, &KernelSpec::gaussian(1)).unwrap();
            let n = vals.len();
            for t in 0..n {
                for s in 0..n {
                    prop_assert_eq!(m[[t, s]], m[[s, t]]);
                }
            }
        }

        #[test]
        fn loo_density_scales_as_h_to_minus_d(
            vals in proptest::collection::vec(-5.0f64..5.0, 3..15),
            h in 0.1f64..2.0,
        ) {
            // Direct recomputation of the formula at a doubled bandwidth.
            let sample = univariate(&vals);
            let spec = KernelSpec::gaussian(1);
            let m2 = kernel_weight_matrix(sample.w(), 2.0 * h, &spec).unwrap();
            let n = vals.len();
            for t in 0..n {
                let direct: f64 = (0..n)
                    .filter(|&s| s != t)
                    .map(|s| spec.eval(&[(vals[t] - vals[s]) / (2.0 * h)]).unwrap())
                    .sum::<f64>()
                    / ((n - 1) as f64 * (2.0 * h));
                prop_assert!((loo_density(&m2, 2.0 * h, 1, t) - direct).abs() < 1e-12);
            }
        }

        #[test]
        fn loo_cond_cdf_is_monotone_and_bounded(
            vals in proptest::collection::vec(-3.0f64..3.0, 4..16),
            z in proptest::collection::vec(-3.0f64..3.0, 4..16),
            h in 0.2f64..2.0,
        ) {
            let n = vals.len().min(z.len());
            let sample = univariate(&vals[..n]);
            let m = kernel_weight_matrix(sample.w(), h, &KernelSpec::gaussian(1)).unwrap();
            let mut thresholds: Vec<f64> = z[..n].to_vec();
            thresholds.sort_by(f64::total_cmp);
            for t in 0..n {
                let mut prev = 0.0;
                for &zt in &thresholds {
                    let ind: Vec<bool> = z[..n].iter().map(|&v| v <= zt).collect();
                    let f = loo_cond_cdf(&m, &ind, t).unwrap();
                    prop_assert!((0.0..=1.0).contains(&f));
                    prop_assert!(f >= prev - 1e-15);
                    prev = f;
                }
                // Below the minimum and at the maximum of the Z sample.
                let all = vec![true; n];
                let none = vec![false; n];
                prop_assert_eq!(loo_cond_cdf(&m, &all, t).unwrap(), 1.0);
                prop_assert_eq!(loo_cond_cdf(&m, &none, t).unwrap(), 0.0);
            }
        }

        #[test]
        fn self_term_is_excluded(
            vals in proptest::collection::vec(-5.0f64..5.0, 3..12),
            shift in 0.5f64..5.0,
        ) {
            // Perturbing row t changes the kernel weights to t everywhere,
            // but the leave-one-out sum at t never sees the own weight.
            let n = vals.len();
            let spec = KernelSpec::gaussian(1);
            let m = kernel_weight_matrix(univariate(&vals).w(), 1.0, &spec).unwrap();
            let t = n / 2;
            let mut moved = vals.clone();
            moved[t] += shift;
            let m2 = kernel_weight_matrix(univariate(&moved).w(), 1.0, &spec).unwrap();
            // Own-row diagonal is K(0) in both; the difference in f_hat comes
            // only from the cross terms.
            prop_assert_eq!(m[[t, t]], m2[[t, t]]);
            let direct: f64 = (0..n)
                .filter(|&s| s != t)
                .map(|s| spec.eval(&[(moved[t] - moved[s])]).unwrap())
                .sum::<f64>() / ((n - 1) as f64);
            prop_assert!((loo_density(&m2, 1.0, 1, t) - direct).abs() < 1e-12);
        }
    }
}
