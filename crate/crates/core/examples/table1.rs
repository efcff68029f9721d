//! Linear regression under contaminated mixture noise: mean weight RMSE of
//! MSE, MCC, mixture MCC and MMKCC over Monte-Carlo runs for each noise case.
//!
//! cargo run --release --example table1 -- [runs] [schedule]

use mkc::bench::{run_experiment, ExperimentConfig, ExperimentKind};
use mkc::schedule::Schedule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let schedule: Schedule = args.next().map(|s| s.parse()).transpose()?.unwrap_or_default();

    for case in 1..=3 {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Linear, case)?;
        cfg.runs = runs;
        cfg.schedule = schedule;
        let res = run_experiment(&cfg)?;
        println!("case {case} ({} runs, {schedule})", runs - res.flagged.len());
        for s in &res.summaries {
            println!(
                "  {:<6} {:.4} +/- {:.4}   {:.2e} s/fit",
                s.criterion.to_string(),
                s.mean_rmse,
                s.std_rmse,
                s.mean_time_sec
            );
        }
    }
    Ok(())
}
