//! Grid scan for the fixed MCC and mixture MCC kernels of the linear
//! benchmark. Uses pilot seeds far from the benchmark seeds (which start at 0)
//! and prints the best kernels per noise case. The mixture grid includes
//! equal bandwidths, so it always contains the plain MCC candidates.
//!
//! cargo run --release --example tune_baselines -- [pilot_runs]

use mkc::bench::{run_experiment, Criterion, ExperimentConfig, ExperimentKind};

const PILOT_SEED: u64 = 1 << 40;
const SIGMAS: [f64; 15] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0];
const WEIGHTS: [f64; 3] = [0.2, 0.5, 0.8];

fn pilot_mean(case: u8, runs: usize, criterion: Criterion, tweak: impl Fn(&mut ExperimentConfig)) -> f64 {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Linear, case).unwrap();
    cfg.runs = runs;
    cfg.seed = PILOT_SEED;
    cfg.criteria = vec![criterion];
    tweak(&mut cfg);
    match run_experiment(&cfg) {
        Ok(res) => res.summaries[0].mean_rmse,
        Err(_) => f64::INFINITY,
    }
}

fn main() {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    for case in 1..=3 {
        let (mut best_mcc, mut mcc_sigma) = (f64::INFINITY, 0.0);
        for &s in &SIGMAS {
            let v = pilot_mean(case, runs, Criterion::Mcc, |c| c.baselines.mcc_sigma = s);
            if v < best_mcc {
                (best_mcc, mcc_sigma) = (v, s);
            }
        }
        let (mut best_mmcc, mut mmcc) = (f64::INFINITY, ([0.0; 2], [0.0; 2]));
        for (i, &s1) in SIGMAS.iter().enumerate() {
            for &s2 in &SIGMAS[i..] {
                let weights: &[f64] = if s1 == s2 { &[0.5] } else { &WEIGHTS };
                for &l in weights {
                    let lambdas = [l, 1.0 - l];
                    let v = pilot_mean(case, runs, Criterion::Mmcc, |c| {
                        c.baselines.mmcc_lambdas = lambdas;
                        c.baselines.mmcc_sigmas = [s1, s2];
                    });
                    if v < best_mmcc {
                        (best_mmcc, mmcc) = (v, (lambdas, [s1, s2]));
                    }
                }
            }
        }
        println!("case {case}: mcc sigma = {mcc_sigma} ({best_mcc:.4})");
        println!(
            "case {case}: mmcc lambdas = [{:.2}, {:.2}], sigmas = {:?} ({best_mmcc:.4})",
            mmcc.0[0], mmcc.0[1], mmcc.1
        );
    }
}
