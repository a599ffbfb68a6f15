//! Monte Carlo experiment runner for size/power tables.
//!
//! A grid is the cross product of DGPs, sample sizes, bandwidth rules, and
//! bootstrap schemes. Every cell runs `R` independent replications
//! (simulate, triplet, bootstrap test, reject when `p < alpha`) and
//! reports rejection rates for both statistics with their Monte Carlo
//! standard errors. Replication seeds derive from the cell identity and
//! the replication index, so rates do not depend on execution order or
//! worker count. Per-replication failures (for example a degenerate
//! bandwidth) are counted per cell rather than aborting the grid.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_test, BootstrapConfig, BootstrapScheme, TestConfig};
use crate::dgp::{simulate_sample, DgpId, DgpSpec, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::process::WeightFamily;
use crate::rng::{child_seed, DOMAIN_MC};
use crate::smoothing::BandwidthRule;

/// The experiment description: everything needed to reproduce a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub dgps: Vec<DgpId>,
    pub sample_sizes: Vec<usize>,
    pub bandwidths: Vec<BandwidthRule>,
    pub schemes: Vec<BootstrapScheme>,
    pub weight_family: WeightFamily,
    /// Monte Carlo replications per cell.
    pub replications: usize,
    /// Bootstrap replications per test.
    pub bootstrap_replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub burn_in: usize,
}

impl ExperimentGrid {
    /// Desk-scale defaults: indicator weights, multiplier bootstrap,
    /// R = 500, B = 200, 5% level.
    pub fn new(dgps: Vec<DgpId>, sample_sizes: Vec<usize>, seed: u64) -> Self {
        Self {
            dgps,
            sample_sizes,
            bandwidths: vec![BandwidthRule::FixedC { c: 1.0 }],
            schemes: vec![BootstrapScheme::Multiplier],
            weight_family: WeightFamily::Indicator,
            replications: 500,
            bootstrap_replications: 200,
            alpha: 0.05,
            seed,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 || self.bootstrap_replications == 0 {
            return Err(Error::InvalidConfig("replication counts must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if self.dgps.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::InvalidConfig("grid needs at least one DGP and sample size".into()));
        }
        if self.bandwidths.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidConfig("grid needs a bandwidth rule and a scheme".into()));
        }
        Ok(())
    }
}

/// One grid cell's aggregated outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dgp: DgpId,
    pub n: usize,
    pub bandwidth: BandwidthRule,
    pub scheme: BootstrapScheme,
    pub cvm_rejection_rate: f64,
    pub ks_rejection_rate: f64,
    pub cvm_stderr: f64,
    pub ks_stderr: f64,
    /// Replications that produced a test result.
    pub completed: usize,
    /// Replications that failed (error message counts are logged upstream).
    pub failed: usize,
    /// Wall-clock time; excluded from serialized reports so identical
    /// configurations emit byte-identical files.
    #[serde(skip, default)]
    pub elapsed: Duration,
}

/// The full experiment outcome: config echo plus one report per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub grid: ExperimentGrid,
    pub cells: Vec<CellReport>,
}

/// Monte Carlo standard error of a rejection-rate estimate.
pub fn mc_stderr(p: f64, r: usize) -> f64 {
    (p * (1.0 - p) / r as f64).sqrt()
}

fn rule_tag(rule: &BandwidthRule) -> u64 {
    match rule {
        BandwidthRule::FixedC { c } => c.to_bits(),
        BandwidthRule::DataDriven => u64::MAX,
    }
}

fn scheme_tag(scheme: &BootstrapScheme) -> u64 {
    match scheme {
        BootstrapScheme::Multiplier => 0,
        BootstrapScheme::BlockMultiplier { a } => a.to_bits() | 1,
    }
}

/// Per-replication p-values for one cell. Seeds derive from the cell
/// identity, so any subset of cells reproduces the same numbers.
pub fn cell_pvalues(
    grid: &ExperimentGrid,
    dgp: DgpId,
    n: usize,
    bandwidth: &BandwidthRule,
    scheme: &BootstrapScheme,
) -> Vec<std::result::Result<(f64, f64), Error>> {
    let cell_path = [DOMAIN_MC, dgp.ordinal(), n as u64, rule_tag(bandwidth), scheme_tag(scheme)];
    (0..grid.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut path = cell_path.to_vec();
            path.push(rep);
            path.push(0);
            let dgp_seed = child_seed(grid.seed, &path);
            *path.last_mut().unwrap() = 1;
            let boot_seed = child_seed(grid.seed, &path);
            let spec = DgpSpec { id: dgp, n, burn_in: grid.burn_in, seed: dgp_seed };
            let sample = simulate_sample(&spec)?;
            let config = TestConfig {
                bandwidth: *bandwidth,
                weight_family: grid.weight_family.clone(),
                bootstrap: BootstrapConfig {
                    scheme: *scheme,
                    replications: grid.bootstrap_replications,
                    seed: boot_seed,
                },
            };
            let result = bootstrap_test(&sample, &config)?;
            Ok((result.p_cvm, result.p_ks))
        })
        .collect()
}

/// Run the whole grid.
pub fn run_experiment(grid: &ExperimentGrid) -> Result<McReport> {
    grid.validate()?;
    let mut cells = Vec::new();
    for scheme in &grid.schemes {
        for n in &grid.sample_sizes {
            for bandwidth in &grid.bandwidths {
                for dgp in &grid.dgps {
                    let started = Instant::now();
                    let outcomes = cell_pvalues(grid, *dgp, *n, bandwidth, scheme);
                    let mut cvm_rejects = 0usize;
                    let mut ks_rejects = 0usize;
                    let mut completed = 0usize;
                    let mut failed = 0usize;
                    for outcome in &outcomes {
                        match outcome {
                            Ok((p_cvm, p_ks)) => {
                                completed += 1;
                                if *p_cvm < grid.alpha {
                                    cvm_rejects += 1;
                                }
                                if *p_ks < grid.alpha {
                                    ks_rejects += 1;
                                }
                            }
                            Err(_) => failed += 1,
                        }
                    }
                    let denom = completed.max(1);
                    let cvm_rate = cvm_rejects as f64 / denom as f64;
                    let ks_rate = ks_rejects as f64 / denom as f64;
                    cells.push(CellReport {
                        dgp: *dgp,
                        n: *n,
                        bandwidth: *bandwidth,
                        scheme: *scheme,
                        cvm_rejection_rate: cvm_rate,
                        ks_rejection_rate: ks_rate,
                        cvm_stderr: mc_stderr(cvm_rate, denom),
                        ks_stderr: mc_stderr(ks_rate, denom),
                        completed,
                        failed,
                        elapsed: started.elapsed(),
                    });
                }
            }
        }
    }
    Ok(McReport { grid: grid.clone(), cells })
}
