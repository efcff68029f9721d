use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mkc::bench::{emit_report, run_experiment, Criterion, ExperimentConfig, ExperimentKind};
use mkc::datagen::{gen_linear_dataset, mackey_glass, read_dataset, read_table, windowize, Dataset, MackeyGlassSpec, NoiseSpec};
use mkc::params::{determine_params, ParamSelectConfig};
use mkc::schedule::fit_mmkcc_adaptive;
use mkc::solver::{fit_mmkcc, fit_mse, LipProblem};
use mkc::MkcError;

/// Multi-kernel correntropy benchmark harness.
#[derive(Parser)]
#[command(name = "mkc-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["online", "two-stage"])]
    schedule: Option<String>,
    /// Comma-separated subset of mse,mcc,mmcc,mmkcc.
    #[arg(long)]
    criteria: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (`x1..xd,t`) to <out>/dataset.csv.
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// Fit one model and print the weights and the objective trace.
    Fit {
        #[command(flatten)]
        common: Common,
        /// CSV to fit instead of a generated linear dataset.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Target column of --data.
        #[arg(long, default_value = "t")]
        target: String,
    },
    /// Determine kernel parameters from a column of errors.
    Params {
        #[command(flatten)]
        common: Common,
        /// CSV holding the errors.
        #[arg(long)]
        errors: PathBuf,
        /// Column to read; defaults to the first.
        #[arg(long)]
        column: Option<String>,
    },
    /// Run a Monte-Carlo experiment and write CSV/SVG reports to <out>.
    Bench {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &MkcError) -> u8 {
    match e {
        MkcError::Io { .. } | MkcError::Data { .. } => 3,
        e if e.is_numeric() => 2,
        _ => 1,
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, MkcError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::new(ExperimentKind::Linear, 1)?,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(s) = &common.schedule {
        cfg.schedule = s.parse()?;
    }
    if let Some(c) = &common.criteria {
        cfg.criteria = Criterion::parse_list(c)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: Cli) -> Result<(), MkcError> {
    match cli.command {
        Command::Gen { common } => {
            let cfg = load_config(&common)?;
            let ds = generate(&cfg)?;
            let dir = out_dir(&cfg, ".");
            std::fs::create_dir_all(&dir).map_err(|e| MkcError::Io { path: dir.clone(), source: e })?;
            let path = dir.join("dataset.csv");
            ds.write_csv(&path)?;
            println!("wrote {} rows to {}", ds.len(), path.display());
        }
        Command::Fit { common, data, target } => {
            let cfg = load_config(&common)?;
            let ds = match &data {
                Some(path) => read_dataset(path, &target)?,
                None => generate(&cfg)?,
            };
            let problem = LipProblem::with_default_regularization(ds.inputs, ds.targets)?;
            let criterion = if common.criteria.is_some() { cfg.criteria[0] } else { Criterion::Mmkcc };
            let select = ParamSelectConfig {
                kmeans_seed: cfg.seed,
                ..cfg.select.clone()
            };
            let (beta, trace) = match criterion {
                Criterion::Mse => (fit_mse(&problem)?, Vec::new()),
                Criterion::Mcc | Criterion::Mmcc => {
                    let p = if criterion == Criterion::Mcc { cfg.baselines.mcc()? } else { cfg.baselines.mmcc()? };
                    let r = fit_mmkcc(&problem, &p, &cfg.solver)?;
                    (r.weights, r.objective_trace)
                }
                Criterion::Mmkcc => {
                    let fit = match &cfg.mmkcc_fixed {
                        Some(p) => fit_mmkcc(&problem, p, &cfg.solver)?,
                        None => {
                            let f = fit_mmkcc_adaptive(&problem, &select, &cfg.solver, cfg.schedule)?;
                            print_params(f.final_params());
                            f.report
                        }
                    };
                    (fit.weights, fit.objective_trace)
                }
            };
            println!("criterion {criterion}");
            println!("beta {}", join(beta.iter()));
            for (k, j) in trace.iter().enumerate() {
                println!("J[{k}] {j}");
            }
        }
        Command::Params { common, errors, column } => {
            let cfg = load_config(&common)?;
            let table = read_table(&errors)?;
            let col = match &column {
                Some(name) => table.column_index(name, &errors)?,
                None => 0,
            };
            let values: Vec<f64> = table.rows.iter().map(|r| r[col]).collect();
            let select = ParamSelectConfig {
                kmeans_seed: cfg.seed,
                ..cfg.select.clone()
            };
            print_params(&determine_params(&values, &select)?);
        }
        Command::Bench { common } => {
            let cfg = load_config(&common)?;
            let res = run_experiment(&cfg)?;
            let dir = out_dir(&cfg, "bench-out");
            emit_report(&res, &dir)?;
            println!("{} experiment, {} runs ({} flagged)", cfg.kind, cfg.runs, res.flagged.len());
            for s in &res.summaries {
                println!("{:<6} mean {:.6} std {:.6} time {:.3e} s", s.criterion.to_string(), s.mean_rmse, s.std_rmse, s.mean_time_sec);
            }
            for f in &res.flagged {
                println!("flagged run {} (seed {}, {}): {}", f.run, f.seed, f.criterion, f.reason);
            }
            println!("reports in {}", dir.display());
        }
    }
    Ok(())
}

fn generate(cfg: &ExperimentConfig) -> Result<Dataset, MkcError> {
    match cfg.kind {
        ExperimentKind::Linear => gen_linear_dataset(
            &[1.0, 2.0],
            cfg.n_samples,
            &NoiseSpec::linear_case(cfg.noise_case)?,
            &[(-2.0, 2.0), (-2.0, 2.0)],
            cfg.seed,
        ),
        ExperimentKind::Timeseries => {
            let series = mackey_glass(&MackeyGlassSpec {
                noise: Some(NoiseSpec::mackey_glass()),
                length: cfg.n_samples + cfg.lag,
                seed: cfg.seed,
                ..MackeyGlassSpec::default()
            })?;
            let (inputs, targets) = windowize(&series, cfg.lag)?;
            Ok(Dataset {
                inputs,
                targets,
                normalization: None,
            })
        }
        ExperimentKind::Elm => Err(MkcError::Config("gen and fit support kind = linear or timeseries".into())),
    }
}

fn print_params(p: &mkc::MkcParams) {
    println!("lambda {}", join(p.lambdas().iter()));
    println!("c {}", join(p.centers().iter()));
    println!("sigma {}", join(p.sigmas().iter()));
}

fn join<'a>(v: impl Iterator<Item = &'a f64>) -> String {
    v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
