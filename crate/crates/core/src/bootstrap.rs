//! Multiplier and block-multiplier bootstrap, p-values, and the complete
//! three-step testing algorithm.
//!
//! A bootstrap replication reweights the precomputed residual matrix with
//! i.i.d. mean-zero unit-variance draws,
//!
//! ```text
//! S*_n(g_j) = n^{-1/2} sum_t e_hat_t(g_j) v_t,
//! ```
//!
//! so no nonparametric estimate is recomputed per replication. The
//! multiplier weights are the two-point draws of Mammen (1993); the block
//! variant applies N(0, 1/L) weights to within-block sums of residuals,
//!
//! ```text
//! S*block_n(g_j) = n^{-1/2} sum_{t=1}^{n-L+1} zeta_t sum_{s=t}^{t+L-1} e_hat_s(g_j),
//! ```
//!
//! with block length `L = floor(a n^{1/4})`, and reduces exactly to the
//! multiplier scheme with standard normal weights at `L = 1`. P-values
//! count bootstrap statistics at least as large as the observed one.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{
    process_on_sample_with, residual_matrix_with, sample_eval_points, KernelContext,
    ProcessValues, ResidualMatrix, WeightFamily,
};
use crate::rng::{stream, DOMAIN_BOOTSTRAP};
use crate::sample::TimeSeriesSample;
use crate::smoothing::{bandwidth, BandwidthRule};
use crate::stats::{compute_statistics, StatisticValue};

/// Lower support point of the Mammen two-point distribution, `(1-sqrt(5))/2`.
pub fn mammen_low() -> f64 {
    (1.0 - 5.0f64.sqrt()) / 2.0
}

/// Upper support point, `(1+sqrt(5))/2`.
pub fn mammen_high() -> f64 {
    (1.0 + 5.0f64.sqrt()) / 2.0
}

/// Probability of the lower support point, `(1+sqrt(5))/(2 sqrt(5))`.
/// The complementary mass `(sqrt(5)-1)/(2 sqrt(5))` falls on the upper
/// point, making the draws mean-zero with unit variance.
pub fn mammen_prob_low() -> f64 {
    let r = 5.0f64.sqrt();
    (1.0 + r) / (2.0 * r)
}

/// Draw `n` i.i.d. Mammen multiplier weights.
pub fn mammen_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (low, high, p_low) = (mammen_low(), mammen_high(), mammen_prob_low());
    (0..n).map(|_| if rng.random::<f64>() < p_low { low } else { high }).collect()
}

/// Resampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum BootstrapScheme {
    Multiplier,
    /// Block multiplier with `L = floor(a n^{1/4})`.
    BlockMultiplier { a: f64 },
}

/// Bootstrap configuration: scheme, replication count `B`, and root seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(flatten)]
    pub scheme: BootstrapScheme,
    pub replications: usize,
    pub seed: u64,
}

/// Full test configuration; together with the sample this determines a
/// test run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub bandwidth: BandwidthRule,
    pub weight_family: WeightFamily,
    pub bootstrap: BootstrapConfig,
}

/// Empirical quantiles of one bootstrap statistic distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub q90: f64,
    pub q95: f64,
    pub q99: f64,
}

/// Outcome of a bootstrap test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Number of observations the statistics were computed from.
    pub n: usize,
    /// Bandwidth actually used.
    pub bandwidth: f64,
    /// Block length for the block scheme.
    pub block_length: Option<usize>,
    pub statistic: StatisticValue,
    /// `B^{-1} #{b : CvM*_b >= CvM_n}`; a multiple of `1/B` in `[0, 1]`.
    pub p_cvm: f64,
    pub p_ks: f64,
    pub cvm_bootstrap: QuantileSummary,
    pub ks_bootstrap: QuantileSummary,
    /// Configuration echo, including the seed.
    pub config: TestConfig,
}

/// Block length `L = floor(a n^{1/4})`.
pub fn block_length(a: f64, n: usize) -> usize {
    (a * (n as f64).powf(0.25)).floor() as usize
}

fn weighted_statistics(e: &ResidualMatrix, weights: &[f64], scale: f64) -> Result<StatisticValue> {
    let values = e.values();
    let mut s = Vec::with_capacity(values.nrows());
    for row in values.rows() {
        let mut acc = 0.0;
        for (v, w) in row.iter().zip(weights) {
            acc += v * w;
        }
        s.push(scale * acc);
    }
    compute_statistics(&ProcessValues::new(s, e.layout())?)
}

/// One multiplier replication: statistics of `n^{-1/2} sum_t e_hat_t(g) v_t`.
pub fn multiplier_replicate(e: &ResidualMatrix, v: &[f64]) -> Result<StatisticValue> {
    let n = e.n();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
    }
    weighted_statistics(e, v, 1.0 / (n as f64).sqrt())
}

/// Within-block sums `C_t(g) = sum_{s=t}^{t+L-1} e_hat_s(g)`, one column per
/// block start `t = 1..n-L+1`. Summed directly per block (no sliding
/// window), so a length-one block is the bare residual, bit for bit.
fn block_sums(e: &ResidualMatrix, block_len: usize) -> Array2<f64> {
    let n = e.n();
    let rows = e.n_rows();
    let starts = n - block_len + 1;
    let values = e.values();
    let mut sums = Array2::zeros((rows, starts));
    for r in 0..rows {
        for t in 0..starts {
            let mut acc = 0.0;
            for s in t..t + block_len {
                acc += values[[r, s]];
            }
            sums[[r, t]] = acc;
        }
    }
    sums
}

fn block_replicate_from(
    e: &ResidualMatrix,
    sums: &Array2<f64>,
    block_len: usize,
    rng: &mut impl Rng,
) -> Result<StatisticValue> {
    let n = e.n();
    let starts = sums.ncols();
    let sd = 1.0 / (block_len as f64).sqrt();
    let zeta: Vec<f64> = (0..starts).map(|_| rng.sample::<f64, _>(StandardNormal) * sd).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let mut s = Vec::with_capacity(sums.nrows());
    for row in sums.rows() {
        let mut acc = 0.0;
        for (v, z) in row.iter().zip(&zeta) {
            acc += v * z;
        }
        s.push(scale * acc);
    }
    compute_statistics(&ProcessValues::new(s, e.layout())?)
}

/// One block-multiplier replication with `zeta_t ~ N(0, 1/L)` drawn from
/// the given stream.
pub fn block_multiplier_replicate(
    e: &ResidualMatrix,
    block_len: usize,
    rng: &mut impl Rng,
) -> Result<StatisticValue> {
    let n = e.n();
    if block_len == 0 || block_len > n {
        return Err(Error::InvalidBlockLength { len: block_len, n });
    }
    let sums = block_sums(e, block_len);
    block_replicate_from(e, &sums, block_len, rng)
}

/// Share of bootstrap draws at least as large as the observed statistic
/// (weak inequality, so ties count as exceedances).
fn p_value(draws: &[f64], observed: f64) -> f64 {
    draws.iter().filter(|&&d| d >= observed).count() as f64 / draws.len() as f64
}

/// Empirical quantile of type 1 (order statistic at `ceil(q B)`).
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let b = sorted.len();
    let idx = ((q * b as f64).ceil() as usize).clamp(1, b) - 1;
    sorted[idx]
}

fn quantile_summary(mut draws: Vec<f64>) -> QuantileSummary {
    draws.sort_by(f64::total_cmp);
    QuantileSummary {
        q90: empirical_quantile(&draws, 0.90),
        q95: empirical_quantile(&draws, 0.95),
        q99: empirical_quantile(&draws, 0.99),
    }
}

/// Run the full test: compute the observed statistics, draw `B` bootstrap
/// replications from per-index derived streams, and report p-values and
/// bootstrap quantiles. Deterministic given `(sample, config)`, no matter
/// how many workers execute the replications.
pub fn bootstrap_test(sample: &TimeSeriesSample, config: &TestConfig) -> Result<TestResult> {
    sample.require_rows(2)?;
    let b = config.bootstrap.replications;
    if b == 0 {
        return Err(Error::InvalidConfig("bootstrap replications must be at least 1".into()));
    }
    let n = sample.n();
    let h = bandwidth(&config.bandwidth, sample)?;
    let block_len = match config.bootstrap.scheme {
        BootstrapScheme::Multiplier => None,
        BootstrapScheme::BlockMultiplier { a } => {
            if a <= 0.0 || !a.is_finite() {
                return Err(Error::InvalidConfig(format!("block constant a={a} must be positive")));
            }
            let l = block_length(a, n);
            if l == 0 || l > n {
                return Err(Error::InvalidBlockLength { len: l, n });
            }
            Some(l)
        }
    };

    // Step 1: the observed statistics.
    let ctx = KernelContext::new(sample.w(), h)?;
    let observed = compute_statistics(&process_on_sample_with(&ctx, sample, &config.weight_family)?)?;

    // Steps 2-3: B reweightings of one residual matrix.
    let points = sample_eval_points(sample);
    let residuals = residual_matrix_with(&ctx, sample, &config.weight_family, &points)?;
    let sums = block_len.map(|l| block_sums(&residuals, l));

    let seed = config.bootstrap.seed;
    let draws: Vec<StatisticValue> = (0..b as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(seed, &[DOMAIN_BOOTSTRAP, rep]);
            match (block_len, &sums) {
                (Some(l), Some(sums)) => block_replicate_from(&residuals, sums, l, &mut rng),
                _ => {
                    let v = mammen_weights(n, &mut rng);
                    multiplier_replicate(&residuals, &v)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let cvm_draws: Vec<f64> = draws.iter().map(|d| d.cvm).collect();
    let ks_draws: Vec<f64> = draws.iter().map(|d| d.ks).collect();
    Ok(TestResult {
        n,
        bandwidth: h,
        block_length: block_len,
        statistic: observed,
        p_cvm: p_value(&cvm_draws, observed.cvm),
        p_ks: p_value(&ks_draws, observed.ks),
        cvm_bootstrap: quantile_summary(cvm_draws),
        ks_bootstrap: quantile_summary(ks_draws),
        config: config.clone(),
    })
}
