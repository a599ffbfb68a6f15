//! Reproduce a slice of the rejection-rate tables at desk scale.
//!
//!     cargo run --release -p condind --example calibrate -- 500 200
//!
//! runs R=500 Monte Carlo replications with B=200 bootstrap replications
//! per test over the size process S1 and the power processes P1-P2 at
//! n = 100, printing one line per cell.
use condind::montecarlo::{run_experiment, ExperimentGrid};
use condind::DgpId;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let reps: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let b: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);

    let started = Instant::now();
    let mut grid =
        ExperimentGrid::new(vec![DgpId::S1, DgpId::S2, DgpId::P1, DgpId::P2], vec![100], 1);
    grid.replications = reps;
    grid.bootstrap_replications = b;
    let report = run_experiment(&grid).expect("grid is valid");
    for cell in &report.cells {
        println!(
            "{} n={}: cvm {:.3} (se {:.3})  ks {:.3} (se {:.3})  [{} ok, {} failed, {:?}]",
            cell.dgp,
            cell.n,
            cell.cvm_rejection_rate,
            cell.cvm_stderr,
            cell.ks_rejection_rate,
            cell.ks_stderr,
            cell.completed,
            cell.failed,
            cell.elapsed
        );
    }
    println!("total {:?}", started.elapsed());
}
