//! Nonparametric conditional-independence tests for time series.
//!
//! Given a stationary sample of triples `(W_t, Y_t, Z_t)`, the library
//! tests the null `Y ⊥ Z | W` through a kernel-smoothed empirical process
//! whose quadratic (Cramér–von Mises type) and sup-norm
//! (Kolmogorov–Smirnov type) functionals serve as test statistics.
//! Critical values come from a multiplier bootstrap that reweights a
//! precomputed residual matrix, with a block-multiplier variant for data
//! whose dependence goes beyond the assumed Markov structure.
//!
//! The crate also ships the eleven benchmark simulators used for size and
//! power studies, a Monte Carlo harness that reproduces the rejection-rate
//! tables, and a linear Granger-causality baseline with Newey–West
//! standard errors.
//!
//! ```
//! use condind::{bootstrap_test, BandwidthRule, BootstrapConfig, BootstrapScheme,
//!               DgpId, DgpSpec, simulate_sample, TestConfig, WeightFamily};
//!
//! let sample = simulate_sample(&DgpSpec::new(DgpId::P1, 100, 7)).unwrap();
//! let config = TestConfig {
//!     bandwidth: BandwidthRule::FixedC { c: 1.0 },
//!     weight_family: WeightFamily::Indicator,
//!     bootstrap: BootstrapConfig {
//!         scheme: BootstrapScheme::Multiplier,
//!         replications: 200,
//!         seed: 7,
//!     },
//! };
//! let result = bootstrap_test(&sample, &config).unwrap();
//! assert!(result.p_cvm <= 1.0);
//! ```

pub mod bootstrap;
pub mod dgp;
pub mod error;
pub mod granger;
pub mod montecarlo;
pub mod process;
pub mod rng;
pub mod sample;
pub mod smoothing;
pub mod stats;

pub use bootstrap::{
    block_length, block_multiplier_replicate, bootstrap_test, mammen_weights, multiplier_replicate,
    BootstrapConfig, BootstrapScheme, QuantileSummary, TestConfig, TestResult,
};
pub use dgp::{lag_embed, make_triplet, simulate, simulate_sample, DgpId, DgpSpec, RawSeries};
pub use error::{Error, Result};
pub use granger::{linear_granger_test, newey_west_se, ols_fit, HacRegressionResult};
pub use montecarlo::{mc_stderr, run_experiment, CellReport, ExperimentGrid, McReport};
pub use process::{
    process_at, process_on_sample, residual_matrix, sample_eval_points, weight_eval, Evaluation,
    EvaluationPoint, ProcessValues, ResidualMatrix, WeightFamily,
};
pub use sample::TimeSeriesSample;
pub use smoothing::{
    bandwidth, kernel_weight_matrix, loo_cond_cdf, loo_density, BandwidthRule, KernelFamily,
    KernelSpec,
};
pub use stats::{compute_statistics, cvm_stat, ks_stat, StatisticValue};
