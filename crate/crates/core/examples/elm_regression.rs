//! Extreme learning machine on `sin(w . x)` with contaminated training
//! targets: per-run clean-test RMSE of the MSE and MMKCC output weights.
//!
//! cargo run --release --example elm_regression -- [runs]

use mkc::bench::{run_experiment, Criterion, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let mut cfg = ExperimentConfig::new(ExperimentKind::Elm, 1)?;
    cfg.runs = runs;
    cfg.criteria = vec![Criterion::Mse, Criterion::Mmkcc];
    let res = run_experiment(&cfg)?;

    let mse = res.rmses(Criterion::Mse);
    let mmkcc = res.rmses(Criterion::Mmkcc);
    let wins = mse.iter().zip(&mmkcc).filter(|(a, b)| b <= a).count();
    for s in &res.summaries {
        println!("{:<6} test RMSE {:.4} +/- {:.4}", s.criterion.to_string(), s.mean_rmse, s.std_rmse);
    }
    println!("MMKCC at least as good as MSE on {wins} of {} runs", mse.len());
    Ok(())
}
