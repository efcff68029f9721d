//! Time-delay network (6 delays, 6 sigmoid hidden units) trained on a noisy
//! Mackey-Glass segment and tested on a clean segment, under MSE, MCC,
//! mixture MCC and MMKCC.
//!
//! cargo run --release --example mackey_glass -- [runs] [step_size] [epochs]

use mkc::bench::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries, 1)?;
    if let Some(runs) = args.next() {
        cfg.runs = runs.parse()?;
    }
    if let Some(step) = args.next() {
        cfg.net.step_size = step.parse()?;
    }
    if let Some(epochs) = args.next() {
        cfg.net.epochs = epochs.parse()?;
    }
    let res = run_experiment(&cfg)?;
    println!(
        "{} runs, step {}, {} epochs, {} schedule",
        cfg.runs - res.flagged.len(),
        cfg.net.step_size,
        cfg.net.epochs,
        cfg.schedule
    );
    for s in &res.summaries {
        println!(
            "  {:<6} clean test RMSE {:.4} +/- {:.4}   {:.2} s/fit",
            s.criterion.to_string(),
            s.mean_rmse,
            s.std_rmse,
            s.mean_time_sec
        );
    }
    if let Some(d) = &res.density {
        let p = &d.params;
        println!("  MMKCC kernel of run 0: lambda {:.3?} c {:.3?} sigma {:.2?}", p.lambdas(), p.centers(), p.sigmas());
    }
    Ok(())
}
