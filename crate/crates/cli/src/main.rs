//! `condind` — nonparametric conditional-independence tests for time
//! series from the command line.
//!
//! Subcommands: `test` (run the bootstrap test on a CSV file), `simulate`
//! (write a benchmark triplet), `mc` (rejection-rate tables), `granger`
//! (linear baseline with HAC standard errors). Identical inputs and seed
//! produce byte-identical JSON reports; set `CONDIND_THREADS` to cap the
//! worker pool.

mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use condind::montecarlo::{run_experiment, ExperimentGrid};
use condind::{
    bootstrap_test, linear_granger_test, simulate_sample, BandwidthRule, BootstrapConfig,
    BootstrapScheme, DgpId, DgpSpec, TestConfig, WeightFamily,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use input::{build_sample, CsvTable};
use report::{config_hash, write_output, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] condind::Error),
}

#[derive(Parser)]
#[command(
    name = "condind",
    version,
    about = "Nonparametric conditional-independence tests for time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test Y independent of Z given W on a CSV file
    Test(TestArgs),
    /// Simulate a benchmark process and emit its (W, Y, Z) triplet
    Simulate(SimulateArgs),
    /// Monte Carlo rejection-rate experiment over a grid of cells
    Mc(McArgs),
    /// Linear Granger-causality baseline with Newey-West standard errors
    Granger(GrangerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightFamilyArg {
    Indicator,
    Sine,
    ComplexExp,
}

impl WeightFamilyArg {
    fn to_family(self) -> WeightFamily {
        match self {
            WeightFamilyArg::Indicator => WeightFamily::Indicator,
            WeightFamilyArg::Sine => WeightFamily::Sine { domain: None },
            WeightFamilyArg::ComplexExp => WeightFamily::ComplexExp { domain: None },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BootstrapArg {
    Multiplier,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Optional config file; command-line flags take precedence over these.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDefaults {
    bandwidth_c: Option<f64>,
    bandwidth_auto: Option<bool>,
    weight_family: Option<String>,
    bootstrap: Option<String>,
    block_a: Option<f64>,
    replications: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
}

impl FileDefaults {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config '{}': {e}", p.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::Config(format!("invalid config '{}': {e}", p.display()))
                })
            }
        }
    }
}

#[derive(Args)]
struct CommonTestFlags {
    /// Fixed bandwidth constant: h = c * n^(-1/3.5)
    #[arg(long, conflicts_with = "bandwidth")]
    bandwidth_c: Option<f64>,
    /// 'auto' selects the data-driven rule h = 1.06 * Std(W) * n^(-1/3.5)
    #[arg(long, value_parser = ["auto"])]
    bandwidth: Option<String>,
    #[arg(long, value_enum)]
    weight_family: Option<WeightFamilyArg>,
    #[arg(long, value_enum)]
    bootstrap: Option<BootstrapArg>,
    /// Block length constant: L = floor(a * n^(1/4))
    #[arg(long)]
    block_a: Option<f64>,
    /// Bootstrap replications
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

struct ResolvedTest {
    bandwidth: BandwidthRule,
    weight_family: WeightFamily,
    scheme: BootstrapScheme,
    replications: usize,
    alpha: f64,
    seed: u64,
}

impl CommonTestFlags {
    fn resolve(&self, default_b: usize) -> Result<ResolvedTest, CliError> {
        let file = FileDefaults::load(self.config.as_deref())?;
        let auto = self.bandwidth.as_deref() == Some("auto")
            || (self.bandwidth_c.is_none() && file.bandwidth_auto == Some(true));
        let bandwidth = if auto {
            if self.bandwidth_c.is_some() {
                return Err(CliError::Config(
                    "--bandwidth-c conflicts with --bandwidth auto".into(),
                ));
            }
            BandwidthRule::DataDriven
        } else {
            BandwidthRule::FixedC { c: self.bandwidth_c.or(file.bandwidth_c).unwrap_or(1.0) }
        };
        let weight_family = match self.weight_family {
            Some(w) => w.to_family(),
            None => match file.weight_family.as_deref() {
                None | Some("indicator") => WeightFamily::Indicator,
                Some("sine") => WeightFamily::Sine { domain: None },
                Some("complex-exp") | Some("complex_exp") => {
                    WeightFamily::ComplexExp { domain: None }
                }
                Some(other) => {
                    return Err(CliError::Config(format!("unknown weight family '{other}'")))
                }
            },
        };
        let block_a = self.block_a.or(file.block_a).unwrap_or(2.0);
        let scheme = match self.bootstrap {
            Some(BootstrapArg::Multiplier) => BootstrapScheme::Multiplier,
            Some(BootstrapArg::Block) => BootstrapScheme::BlockMultiplier { a: block_a },
            None => match file.bootstrap.as_deref() {
                None | Some("multiplier") => BootstrapScheme::Multiplier,
                Some("block") => BootstrapScheme::BlockMultiplier { a: block_a },
                Some(other) => {
                    return Err(CliError::Config(format!("unknown bootstrap scheme '{other}'")))
                }
            },
        };
        let alpha = self.alpha.or(file.alpha).unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Config(format!("alpha {alpha} must lie in (0, 1)")));
        }
        Ok(ResolvedTest {
            bandwidth,
            weight_family,
            scheme,
            replications: self.b.or(file.replications).unwrap_or(default_b),
            alpha,
            seed: self.seed.or(file.seed).unwrap_or(1),
        })
    }
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Column holding the response Y
    #[arg(long)]
    y_col: String,
    /// Column holding the candidate predictor Z
    #[arg(long)]
    z_col: String,
    /// Conditioning columns for W (comma separated; defaults to --y-col)
    #[arg(long, value_delimiter = ',')]
    w_cols: Vec<String>,
    /// Conditioning lags per column
    #[arg(long, default_value_t = 1)]
    lags: usize,
    /// Forecast horizon: Y is taken at t + horizon
    #[arg(long, default_value_t = 0)]
    horizon: usize,
    #[command(flatten)]
    common: CommonTestFlags,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Process id: S1-S4 or P1-P7
    #[arg(long)]
    dgp: DgpId,
    /// Retained series length before the triplet construction
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Observations discarded to wash out initial conditions
    #[arg(long, default_value_t = condind::dgp::DEFAULT_BURN_IN)]
    burn_in: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct McArgs {
    /// DGP ids (comma separated), e.g. S1,S2,P1
    #[arg(long, value_delimiter = ',', required = true)]
    dgp: Vec<DgpId>,
    /// Sample sizes (comma separated)
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Monte Carlo replications per cell
    #[arg(long)]
    reps: Option<usize>,
    /// Bandwidth constants (comma separated)
    #[arg(long, value_delimiter = ',', conflicts_with = "bandwidth")]
    bandwidth_c: Vec<f64>,
    /// 'auto' selects the data-driven bandwidth rule
    #[arg(long, value_parser = ["auto"])]
    bandwidth: Option<String>,
    /// Block constants (comma separated); selects the block scheme
    #[arg(long, value_delimiter = ',')]
    block_a: Vec<f64>,
    #[arg(long, value_enum)]
    weight_family: Option<WeightFamilyArg>,
    #[arg(long, value_enum)]
    bootstrap: Option<BootstrapArg>,
    /// Bootstrap replications per test
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file supplying defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct GrangerArgs {
    #[arg(long)]
    input: PathBuf,
    /// Column holding the target (regressed at t + horizon)
    #[arg(long)]
    y_col: String,
    /// Column holding the predictor whose coefficient is tested
    #[arg(long)]
    z_col: String,
    #[arg(long, default_value_t = 1)]
    horizon: usize,
    /// HAC lag truncation (default: floor(4 (n/100)^(2/9)))
    #[arg(long)]
    hac_lags: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

fn run_test(args: &TestArgs) -> Result<(), CliError> {
    let resolved = args.common.resolve(500)?;
    let table = CsvTable::load(&args.input)?;
    let w_cols: Vec<String> = if args.w_cols.is_empty() {
        vec![args.y_col.clone()]
    } else {
        args.w_cols.clone()
    };
    if args.lags == 0 {
        return Err(CliError::Config("--lags must be at least 1".into()));
    }
    let sample =
        build_sample(&table, &args.y_col, &args.z_col, &w_cols, args.lags, args.horizon)?;
    let config = TestConfig {
        bandwidth: resolved.bandwidth,
        weight_family: resolved.weight_family,
        bootstrap: BootstrapConfig {
            scheme: resolved.scheme,
            replications: resolved.replications,
            seed: resolved.seed,
        },
    };
    let result = bootstrap_test(&sample, &config)?;
    eprintln!(
        "n={} h={:.6} cvm={:.6} (p={:.4}) ks={:.6} (p={:.4}) [reject at {}%: cvm={} ks={}]",
        result.n,
        result.bandwidth,
        result.statistic.cvm,
        result.p_cvm,
        result.statistic.ks,
        result.p_ks,
        resolved.alpha * 100.0,
        result.p_cvm < resolved.alpha,
        result.p_ks < resolved.alpha,
    );
    let content = match args.format {
        FormatArg::Json => {
            Report::new(config_hash(&config), resolved.seed, &result).to_json()?
        }
        FormatArg::Csv => report::test_result_csv(&result),
    };
    write_output(args.output.as_deref(), &content)
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let spec = DgpSpec { id: args.dgp, n: args.n, burn_in: args.burn_in, seed: args.seed };
    let sample = simulate_sample(&spec)?;
    eprintln!("{} n={} -> {} rows", spec.id, spec.n, sample.n());
    let content = match args.format {
        FormatArg::Csv => report::sample_csv(&sample),
        FormatArg::Json => {
            #[derive(Serialize)]
            struct Payload {
                spec: DgpSpec,
                rows: usize,
                w: Vec<Vec<f64>>,
                y: Vec<Vec<f64>>,
                z: Vec<Vec<f64>>,
            }
            let to_rows = |m: ndarray::ArrayView2<'_, f64>| -> Vec<Vec<f64>> {
                (0..m.nrows()).map(|t| m.row(t).to_vec()).collect()
            };
            let payload = Payload {
                spec,
                rows: sample.n(),
                w: to_rows(sample.w()),
                y: to_rows(sample.y()),
                z: to_rows(sample.z()),
            };
            Report::new(config_hash(&spec), args.seed, payload).to_json()?
        }
    };
    write_output(args.output.as_deref(), &content)
}

fn run_mc(args: &McArgs) -> Result<(), CliError> {
    let common = CommonTestFlags {
        bandwidth_c: args.bandwidth_c.first().copied(),
        bandwidth: args.bandwidth.clone(),
        weight_family: args.weight_family,
        bootstrap: args.bootstrap,
        block_a: args.block_a.first().copied(),
        b: args.b,
        alpha: args.alpha,
        seed: args.seed,
        config: args.config.clone(),
    };
    let resolved = common.resolve(200)?;
    let bandwidths: Vec<BandwidthRule> = if matches!(resolved.bandwidth, BandwidthRule::DataDriven)
    {
        vec![BandwidthRule::DataDriven]
    } else if args.bandwidth_c.is_empty() {
        vec![resolved.bandwidth]
    } else {
        args.bandwidth_c.iter().map(|&c| BandwidthRule::FixedC { c }).collect()
    };
    let schemes: Vec<BootstrapScheme> = if !args.block_a.is_empty() {
        args.block_a.iter().map(|&a| BootstrapScheme::BlockMultiplier { a }).collect()
    } else {
        vec![resolved.scheme]
    };
    let grid = ExperimentGrid {
        dgps: args.dgp.clone(),
        sample_sizes: args.n.clone(),
        bandwidths,
        schemes,
        weight_family: resolved.weight_family,
        replications: args.reps.unwrap_or(500),
        bootstrap_replications: resolved.replications,
        alpha: resolved.alpha,
        seed: resolved.seed,
        burn_in: condind::dgp::DEFAULT_BURN_IN,
    };
    let report = run_experiment(&grid)?;
    for cell in &report.cells {
        eprintln!(
            "{} n={} {:?} {:?}: cvm {:.3} (se {:.3}), ks {:.3} (se {:.3}), {} ok / {} failed in {:?}",
            cell.dgp,
            cell.n,
            cell.bandwidth,
            cell.scheme,
            cell.cvm_rejection_rate,
            cell.cvm_stderr,
            cell.ks_rejection_rate,
            cell.ks_stderr,
            cell.completed,
            cell.failed,
            cell.elapsed,
        );
    }
    let content = match args.format {
        FormatArg::Json => Report::new(config_hash(&grid), grid.seed, &report).to_json()?,
        FormatArg::Csv => report::mc_report_csv(&report),
    };
    write_output(args.output.as_deref(), &content)
}

fn run_granger(args: &GrangerArgs) -> Result<(), CliError> {
    let table = CsvTable::load(&args.input)?;
    let target = table.column(&args.y_col)?;
    let predictor = table.column(&args.z_col)?;
    let result = linear_granger_test(target, predictor, args.horizon, args.hac_lags)?;
    eprintln!(
        "horizon={} alpha_hat={:.6} t={:.4} p={:.4} (HAC lags {})",
        result.horizon, result.predictor_coef, result.t_stat, result.p_value, result.hac_lags
    );
    let content = match args.format {
        FormatArg::Json => {
            #[derive(Serialize)]
            struct Echo<'a> {
                y_col: &'a str,
                z_col: &'a str,
                horizon: usize,
                hac_lags: usize,
            }
            let echo = Echo {
                y_col: &args.y_col,
                z_col: &args.z_col,
                horizon: args.horizon,
                hac_lags: result.hac_lags,
            };
            Report::new(config_hash(&echo), args.seed, &result).to_json()?
        }
        FormatArg::Csv => report::granger_csv(&result),
    };
    write_output(args.output.as_deref(), &content)
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("CONDIND_THREADS") {
        if let Ok(threads) = v.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first_line = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            eprintln!("error: {}", first_line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    init_thread_pool();
    let outcome = match &cli.command {
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Mc(args) => run_mc(args),
        Command::Granger(args) => run_granger(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
