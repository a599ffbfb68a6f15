//! Report wrapper and emission.
//!
//! JSON reports carry a provenance block (tool, version, config hash,
//! seed) around the payload and serialize with a fixed key order, so the
//! same inputs and seed always produce byte-identical files. CSV output
//! carries the payload only; for Monte Carlo reports it mirrors the
//! rejection-rate table layout (one column per DGP, one row per statistic
//! and parameter combination).

use std::io::Write;

use condind::montecarlo::McReport;
use condind::smoothing::BandwidthRule;
use condind::{BootstrapScheme, HacRegressionResult, TestResult};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Provenance-wrapped payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    /// FNV-1a hash of the serialized effective configuration.
    pub config_hash: String,
    pub seed: u64,
    pub payload: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(config_hash: String, seed: u64, payload: T) -> Self {
        Self {
            tool: "condind".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Output(format!("serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

/// 64-bit FNV-1a over the canonical JSON form of a config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).unwrap_or_default();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

pub fn write_output(path: Option<&std::path::Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Output(format!("cannot write '{}': {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Output(format!("cannot write to stdout: {e}")))
        }
    }
}

// Shortest round-trip representation; deterministic for a given value.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// One-row CSV for a single test run.
pub fn test_result_csv(result: &TestResult) -> String {
    let mut out = String::from(
        "n,bandwidth,block_length,cvm,ks,p_cvm,p_ks,cvm_q90,cvm_q95,cvm_q99,ks_q90,ks_q95,ks_q99,seed\n",
    );
    let block = result.block_length.map(|l| l.to_string()).unwrap_or_default();
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        result.n,
        fmt_f64(result.bandwidth),
        block,
        fmt_f64(result.statistic.cvm),
        fmt_f64(result.statistic.ks),
        fmt_f64(result.p_cvm),
        fmt_f64(result.p_ks),
        fmt_f64(result.cvm_bootstrap.q90),
        fmt_f64(result.cvm_bootstrap.q95),
        fmt_f64(result.cvm_bootstrap.q99),
        fmt_f64(result.ks_bootstrap.q90),
        fmt_f64(result.ks_bootstrap.q95),
        fmt_f64(result.ks_bootstrap.q99),
        result.config.bootstrap.seed,
    ));
    out
}

fn bandwidth_label(rule: &BandwidthRule) -> String {
    match rule {
        BandwidthRule::FixedC { c } => fmt_f64(*c),
        BandwidthRule::DataDriven => "auto".to_string(),
    }
}

fn block_a_label(scheme: &BootstrapScheme) -> String {
    match scheme {
        BootstrapScheme::Multiplier => String::new(),
        BootstrapScheme::BlockMultiplier { a } => fmt_f64(*a),
    }
}

/// Rejection-rate table: one column per DGP, one row per
/// (statistic, n, bandwidth, block a) combination, mirroring the printed
/// tables' layout. An empty report yields the header only.
pub fn mc_report_csv(report: &McReport) -> String {
    let dgps = &report.grid.dgps;
    let mut out = String::from("statistic,n,bandwidth,block_a");
    for dgp in dgps {
        out.push(',');
        out.push_str(dgp.name());
    }
    out.push('\n');
    for statistic in ["cvm", "ks"] {
        for scheme in &report.grid.schemes {
            for n in &report.grid.sample_sizes {
                for rule in &report.grid.bandwidths {
                    let mut row = format!(
                        "{statistic},{n},{},{}",
                        bandwidth_label(rule),
                        block_a_label(scheme)
                    );
                    for dgp in dgps {
                        let cell = report.cells.iter().find(|c| {
                            c.dgp == *dgp && c.n == *n && c.bandwidth == *rule && c.scheme == *scheme
                        });
                        row.push(',');
                        if let Some(cell) = cell {
                            let rate = if statistic == "cvm" {
                                cell.cvm_rejection_rate
                            } else {
                                cell.ks_rejection_rate
                            };
                            row.push_str(&format!("{rate:.3}"));
                        }
                    }
                    out.push_str(&row);
                    out.push('\n');
                }
            }
        }
    }
    out
}

/// One-row CSV for the linear baseline.
pub fn granger_csv(result: &HacRegressionResult) -> String {
    let mut out = String::from(
        "horizon,n_obs,intercept,target_coef,predictor_coef,predictor_se,t_stat,p_value,hac_lags\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        result.horizon,
        result.n_obs,
        fmt_f64(result.intercept),
        fmt_f64(result.target_coef),
        fmt_f64(result.predictor_coef),
        fmt_f64(result.predictor_se),
        fmt_f64(result.t_stat),
        fmt_f64(result.p_value),
        result.hac_lags,
    ));
    out
}

/// Triplet CSV for simulated samples.
pub fn sample_csv(sample: &condind::TimeSeriesSample) -> String {
    let mut header = Vec::new();
    for j in 0..sample.d_w() {
        header.push(format!("w{}", j + 1));
    }
    for j in 0..sample.d_y() {
        header.push(format!("y{}", j + 1));
    }
    for j in 0..sample.d_z() {
        header.push(format!("z{}", j + 1));
    }
    let mut out = header.join(",");
    out.push('\n');
    for t in 0..sample.n() {
        let mut fields = Vec::new();
        for j in 0..sample.d_w() {
            fields.push(fmt_f64(sample.w()[[t, j]]));
        }
        for j in 0..sample.d_y() {
            fields.push(fmt_f64(sample.y()[[t, j]]));
        }
        for j in 0..sample.d_z() {
            fields.push(fmt_f64(sample.z()[[t, j]]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use condind::montecarlo::{CellReport, ExperimentGrid};
    use condind::{BandwidthRule, BootstrapScheme, DgpId};

    fn empty_grid() -> ExperimentGrid {
        ExperimentGrid {
            dgps: vec![],
            sample_sizes: vec![],
            bandwidths: vec![],
            schemes: vec![],
            weight_family: condind::WeightFamily::Indicator,
            replications: 1,
            bootstrap_replications: 1,
            alpha: 0.05,
            seed: 0,
            burn_in: 500,
        }
    }

    #[test]
    fn empty_mc_report_is_header_only() {
        let report = McReport { grid: empty_grid(), cells: vec![] };
        assert_eq!(mc_report_csv(&report), "statistic,n,bandwidth,block_a\n");
    }

    #[test]
    fn mc_csv_mirrors_table_layout() {
        let mut grid = empty_grid();
        grid.dgps = DgpId::ALL.to_vec();
        grid.sample_sizes = vec![100];
        grid.bandwidths = vec![BandwidthRule::FixedC { c: 0.5 }, BandwidthRule::FixedC { c: 1.0 }];
        grid.schemes = vec![BootstrapScheme::Multiplier];
        let cells: Vec<CellReport> = grid
            .dgps
            .iter()
            .flat_map(|&dgp| {
                grid.bandwidths.iter().map(move |&bandwidth| CellReport {
                    dgp,
                    n: 100,
                    bandwidth,
                    scheme: BootstrapScheme::Multiplier,
                    cvm_rejection_rate: 0.05,
                    ks_rejection_rate: 0.04,
                    cvm_stderr: 0.01,
                    ks_stderr: 0.01,
                    completed: 10,
                    failed: 0,
                    elapsed: std::time::Duration::ZERO,
                })
            })
            .collect();
        let csv = mc_report_csv(&McReport { grid, cells });
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "statistic,n,bandwidth,block_a,S1,S2,S3,S4,P1,P2,P3,P4,P5,P6,P7"
        );
        // Two statistics, one n, two c rows each.
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("cvm,100,0.5,"));
        assert!(lines[2].starts_with("cvm,100,1,"));
        assert!(lines[3].starts_with("ks,100,0.5,"));
        assert!(lines[1].ends_with(",0.050,0.050,0.050,0.050,0.050,0.050,0.050,0.050,0.050,0.050,0.050"));
    }

    #[test]
    fn config_hash_is_stable_per_value() {
        let a = config_hash(&42u64);
        let b = config_hash(&42u64);
        let c = config_hash(&43u64);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
