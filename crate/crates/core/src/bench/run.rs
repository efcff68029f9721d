use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Criterion, ExperimentConfig, ExperimentKind};
use super::{rmse_predictions, rmse_weights};
use crate::datagen::{gen_linear_dataset, mackey_glass, windowize, MackeyGlassSpec, NoiseSpec};
use crate::error::{MkcError, Result};
use crate::kernel::MkcParams;
use crate::models::{elm_features, net_train, NetTrainConfig, RandomFeatureMap, SmallNet, TrainObjective};
use crate::params::{determine_params, ParamSelectConfig};
use crate::schedule::{fit_mmkcc_adaptive, Schedule};
use crate::solver::{fit_mmkcc, fit_mse, LipProblem};

/// Largest share of runs that may diverge before the experiment is declared failed.
const MAX_FLAGGED_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub rmse: f64,
    /// Fixed-point iterations or training epochs.
    pub iterations: usize,
    pub time_sec: f64,
    /// Metric after each iteration, starting from the initial model. For
    /// network training one entry per `refresh` epochs.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedRun {
    pub run: usize,
    pub seed: u64,
    pub criterion: Criterion,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub mean_rmse: f64,
    /// Sample standard deviation (zero for a single run).
    pub std_rmse: f64,
    pub mean_time_sec: f64,
    pub runs: usize,
}

/// Errors and fitted MMKCC kernel of the first retained run.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub errors: Vec<f64>,
    pub params: MkcParams,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub kind: ExperimentKind,
    pub criteria: Vec<Criterion>,
    pub runs_requested: usize,
    /// Ordered by run, then by criterion in configuration order.
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CriterionSummary>,
    pub flagged: Vec<FlaggedRun>,
    pub density: Option<DensitySnapshot>,
}

impl BenchResult {
    pub fn summary(&self, criterion: Criterion) -> Option<&CriterionSummary> {
        self.summaries.iter().find(|s| s.criterion == criterion)
    }

    pub fn rmses(&self, criterion: Criterion) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.criterion == criterion)
            .map(|r| r.rmse)
            .collect()
    }

    /// `(iteration, criterion, mean metric)`; shorter traces are extended by their last value.
    pub fn convergence(&self) -> Vec<(usize, Criterion, f64)> {
        let mut rows = Vec::new();
        for &c in &self.criteria {
            let traces: Vec<&Vec<f64>> = self
                .records
                .iter()
                .filter(|r| r.criterion == c && !r.trace.is_empty())
                .map(|r| &r.trace)
                .collect();
            let len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
            for i in 0..len {
                let mean = traces.iter().map(|t| t[i.min(t.len() - 1)]).sum::<f64>() / traces.len() as f64;
                rows.push((i, c, mean));
            }
        }
        rows
    }
}

struct Fitted {
    rmse: f64,
    iterations: usize,
    time_sec: f64,
    trace: Vec<f64>,
    snapshot: Option<DensitySnapshot>,
}

/// Seeds of run `r` beyond the data seed `seed ^ r`.
struct RunSeeds {
    data: u64,
    kmeans: u64,
    model: u64,
    test: u64,
}

impl RunSeeds {
    fn new(base: u64, run: usize) -> Self {
        let data = base ^ run as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(data);
        rng.set_stream(1);
        RunSeeds {
            data,
            kmeans: rng.gen(),
            model: rng.gen(),
            test: rng.gen(),
        }
    }
}

type RunOutcome = std::result::Result<(Vec<RunRecord>, Option<DensitySnapshot>), FlaggedRun>;

/// Runs every Monte-Carlo repetition in parallel and aggregates in run order.
/// Runs in which any criterion hits a numeric failure are excluded and
/// reported in [`BenchResult::flagged`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<BenchResult> {
    config.validate()?;
    let outcomes: Vec<Result<RunOutcome>> = (0..config.runs)
        .into_par_iter()
        .map(|r| run_once(config, r))
        .collect();

    let mut records = Vec::new();
    let mut flagged = Vec::new();
    let mut density = None;
    for outcome in outcomes {
        match outcome? {
            Ok((recs, snap)) => {
                records.extend(recs);
                if density.is_none() {
                    density = snap;
                }
            }
            Err(f) => flagged.push(f),
        }
    }
    if flagged.len() as f64 > MAX_FLAGGED_SHARE * config.runs as f64 {
        return Err(MkcError::Degenerate(format!(
            "{} of {} runs failed numerically (first: run {}, {}: {})",
            flagged.len(),
            config.runs,
            flagged[0].run,
            flagged[0].criterion,
            flagged[0].reason
        )));
    }
    let summaries = config
        .criteria
        .iter()
        .map(|&c| summarize(c, &records))
        .collect();
    Ok(BenchResult {
        kind: config.kind,
        criteria: config.criteria.clone(),
        runs_requested: config.runs,
        records,
        summaries,
        flagged,
        density,
    })
}

fn summarize(criterion: Criterion, records: &[RunRecord]) -> CriterionSummary {
    let rows: Vec<&RunRecord> = records.iter().filter(|r| r.criterion == criterion).collect();
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.rmse).sum::<f64>() / n;
    let var = if rows.len() > 1 {
        rows.iter().map(|r| (r.rmse - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    CriterionSummary {
        criterion,
        mean_rmse: mean,
        std_rmse: var.sqrt(),
        mean_time_sec: rows.iter().map(|r| r.time_sec).sum::<f64>() / n,
        runs: rows.len(),
    }
}

fn run_once(config: &ExperimentConfig, run: usize) -> Result<RunOutcome> {
    let seeds = RunSeeds::new(config.seed, run);
    let select = ParamSelectConfig {
        kmeans_seed: seeds.kmeans,
        ..config.select.clone()
    };
    let mut arm = match config.kind {
        ExperimentKind::Linear => Arm::Lip(linear_setup(config, &seeds)?),
        ExperimentKind::Elm => Arm::Lip(elm_setup(config, &seeds)?),
        ExperimentKind::Timeseries => Arm::Net(Box::new(net_setup(config, &seeds)?)),
    };
    let mut records = Vec::with_capacity(config.criteria.len());
    let mut snapshot = None;
    for &criterion in &config.criteria {
        let fitted = match &mut arm {
            Arm::Lip(setup) => fit_lip(config, &select, setup, criterion),
            Arm::Net(setup) => fit_net(config, &select, setup, criterion),
        };
        match fitted {
            Ok(f) => {
                if criterion == Criterion::Mmkcc {
                    snapshot = f.snapshot;
                }
                records.push(RunRecord {
                    run,
                    seed: seeds.data,
                    criterion,
                    rmse: f.rmse,
                    iterations: f.iterations,
                    time_sec: f.time_sec,
                    trace: f.trace,
                });
            }
            Err(e) if e.is_numeric() => {
                return Ok(Err(FlaggedRun {
                    run,
                    seed: seeds.data,
                    criterion,
                    reason: e.to_string(),
                }))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Ok((records, snapshot)))
}

enum Arm {
    Lip(LipSetup),
    Net(Box<NetSetup>),
}

enum Metric {
    /// Distance of the weights to the true weights.
    Weights(DVector<f64>),
    /// Prediction error on held-out features against clean targets.
    Predictions(DMatrix<f64>, DVector<f64>),
}

struct LipSetup {
    problem: LipProblem,
    metric: Metric,
}

impl LipSetup {
    fn score(&self, beta: &DVector<f64>) -> Result<f64> {
        match &self.metric {
            Metric::Weights(star) => rmse_weights(beta, star),
            Metric::Predictions(h, t) => {
                let y = h * beta;
                rmse_predictions(y.as_slice(), t.as_slice())
            }
        }
    }
}

fn linear_setup(config: &ExperimentConfig, seeds: &RunSeeds) -> Result<LipSetup> {
    let spec = NoiseSpec::linear_case(config.noise_case)?;
    let beta_star = [1.0, 2.0];
    let ds = gen_linear_dataset(&beta_star, config.n_samples, &spec, &[(-2.0, 2.0), (-2.0, 2.0)], seeds.data)?;
    Ok(LipSetup {
        problem: LipProblem::with_default_regularization(ds.inputs, ds.targets)?,
        metric: Metric::Weights(DVector::from_column_slice(&beta_star)),
    })
}

/// Targets `sin(w . x)` with `x` uniform in `[-1, 1]^d` and `w` uniform in
/// `[-2, 2]^d`; contaminated noise on the training targets only.
fn elm_setup(config: &ExperimentConfig, seeds: &RunSeeds) -> Result<LipSetup> {
    let spec = NoiseSpec::linear_case(config.noise_case)?;
    let d = config.input_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.data);
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let draw = |n: usize, rng: &mut ChaCha8Rng| {
        let x = DMatrix::from_fn(n, d, |_, _| rng.gen_range(-1.0..=1.0));
        let t = DVector::from_fn(n, |j, _| x.row(j).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().sin());
        (x, t)
    };
    let (x_train, clean_train) = draw(config.n_samples, &mut rng);
    let noise = DVector::from_fn(config.n_samples, |_, _| spec.sample_with(&mut rng));
    let mut test_rng = ChaCha8Rng::seed_from_u64(seeds.test);
    let (x_test, t_test) = draw(config.n_test, &mut test_rng);
    let map = RandomFeatureMap::new(d, config.hidden, seeds.model)?;
    let h_train = elm_features(&x_train, &map)?;
    let h_test = elm_features(&x_test, &map)?;
    Ok(LipSetup {
        problem: LipProblem::with_default_regularization(h_train, clean_train + noise)?,
        metric: Metric::Predictions(h_test, t_test),
    })
}

fn fit_lip(config: &ExperimentConfig, select: &ParamSelectConfig, setup: &LipSetup, criterion: Criterion) -> Result<Fitted> {
    let fixed = match criterion {
        Criterion::Mse => {
            let start = Instant::now();
            let beta = fit_mse(&setup.problem)?;
            let time_sec = start.elapsed().as_secs_f64();
            let rmse = setup.score(&beta)?;
            return Ok(Fitted {
                rmse,
                iterations: 0,
                time_sec,
                trace: vec![rmse],
                snapshot: None,
            });
        }
        Criterion::Mcc => Some(config.baselines.mcc()?),
        Criterion::Mmcc => Some(config.baselines.mmcc()?),
        Criterion::Mmkcc => config.mmkcc_fixed.clone(),
    };
    let start = Instant::now();
    let (report, params) = match fixed {
        Some(p) => (fit_mmkcc(&setup.problem, &p, &config.solver)?, p),
        None => {
            let fit = fit_mmkcc_adaptive(&setup.problem, select, &config.solver, config.schedule)?;
            let p = fit.final_params().clone();
            (fit.report, p)
        }
    };
    let time_sec = start.elapsed().as_secs_f64();
    let beta0 = match &config.solver.initial_weights {
        Some(b) => b.clone(),
        None => DVector::zeros(setup.problem.n_features()),
    };
    let mut trace = vec![setup.score(&beta0)?];
    for beta in &report.weight_trace {
        trace.push(setup.score(beta)?);
    }
    let snapshot = (criterion == Criterion::Mmkcc).then(|| -> Result<DensitySnapshot> {
        Ok(DensitySnapshot {
            errors: setup.problem.residuals(&report.weights)?.as_slice().to_vec(),
            params,
        })
    });
    Ok(Fitted {
        rmse: setup.score(&report.weights)?,
        iterations: report.iterations_used,
        time_sec,
        trace,
        snapshot: snapshot.transpose()?,
    })
}

struct NetSetup {
    x_train: DMatrix<f64>,
    t_train: DVector<f64>,
    x_test: DMatrix<f64>,
    t_test: DVector<f64>,
    init: SmallNet,
    /// MSE-trained network, shared by the MSE arm and the MMKCC warm start.
    pilot: Option<(SmallNet, Fitted)>,
}

/// Noisy training segment and an independent clean test segment of the
/// Mackey-Glass recursion, cut into delay-line windows.
fn net_setup(config: &ExperimentConfig, seeds: &RunSeeds) -> Result<NetSetup> {
    let train = mackey_glass(&MackeyGlassSpec {
        noise: Some(NoiseSpec::mackey_glass()),
        length: config.n_samples + config.lag,
        seed: seeds.data,
        ..MackeyGlassSpec::default()
    })?;
    let test = mackey_glass(&MackeyGlassSpec {
        length: config.n_test + config.lag,
        seed: seeds.test,
        ..MackeyGlassSpec::default()
    })?;
    let (x_train, t_train) = windowize(&train, config.lag)?;
    let (x_test, t_test) = windowize(&test, config.lag)?;
    Ok(NetSetup {
        x_train,
        t_train,
        x_test,
        t_test,
        init: SmallNet::random(config.lag, config.hidden, seeds.model),
        pilot: None,
    })
}

impl NetSetup {
    fn score(&self, net: &SmallNet) -> Result<f64> {
        let y = net.predict(&self.x_test)?;
        rmse_predictions(y.as_slice(), self.t_test.as_slice())
    }

    /// Trains in chunks of `refresh` epochs, recording the test error after each chunk.
    /// `objective` is called before every chunk with the current network.
    fn train_traced<F>(&self, start: &SmallNet, config: &ExperimentConfig, mut objective: F) -> Result<(SmallNet, Vec<f64>)>
    where
        F: FnMut(usize, &SmallNet) -> Result<TrainObjective>,
    {
        let mut net = start.clone();
        let mut trace = vec![self.score(&net)?];
        let mut done = 0;
        let mut chunk = 0;
        while done < config.net.epochs {
            let epochs = config.refresh.min(config.net.epochs - done);
            let obj = objective(chunk, &net)?;
            let step = NetTrainConfig {
                step_size: config.net.step_size,
                epochs,
            };
            net = net_train(&net, &self.x_train, &self.t_train, &obj, &step).map_err(|e| match e {
                MkcError::Divergence { iteration } => MkcError::Divergence { iteration: done + iteration },
                other => other,
            })?;
            done += epochs;
            chunk += 1;
            trace.push(self.score(&net)?);
        }
        Ok((net, trace))
    }

    fn residuals(&self, net: &SmallNet) -> Result<Vec<f64>> {
        let y = net.predict(&self.x_train)?;
        Ok((&self.t_train - y).as_slice().to_vec())
    }

    fn pilot(&mut self, config: &ExperimentConfig) -> Result<&(SmallNet, Fitted)> {
        if self.pilot.is_none() {
            let start = Instant::now();
            let (net, trace) = self.train_traced(&self.init, config, |_, _| Ok(TrainObjective::Mse))?;
            let time_sec = start.elapsed().as_secs_f64();
            let rmse = self.score(&net)?;
            self.pilot = Some((
                net,
                Fitted {
                    rmse,
                    iterations: config.net.epochs,
                    time_sec,
                    trace,
                    snapshot: None,
                },
            ));
        }
        Ok(self.pilot.as_ref().expect("pilot was just trained"))
    }
}

/// Network arms. MSE, MCC and MMCC train from the same random initialization.
/// MMKCC continues from the MSE-trained network, with kernels estimated from
/// its residuals once (two-stage) or every `refresh` epochs (online).
fn fit_net(config: &ExperimentConfig, select: &ParamSelectConfig, setup: &mut NetSetup, criterion: Criterion) -> Result<Fitted> {
    let fixed = match criterion {
        Criterion::Mse => {
            let (_, f) = setup.pilot(config)?;
            return Ok(Fitted {
                rmse: f.rmse,
                iterations: f.iterations,
                time_sec: f.time_sec,
                trace: f.trace.clone(),
                snapshot: None,
            });
        }
        Criterion::Mcc => Some(config.baselines.mcc()?),
        Criterion::Mmcc => Some(config.baselines.mmcc()?),
        Criterion::Mmkcc => config.mmkcc_fixed.clone(),
    };
    if let Some(p) = fixed {
        let start = Instant::now();
        let objective = TrainObjective::Mkc(p.clone());
        let (net, trace) = setup.train_traced(&setup.init, config, |_, _| Ok(objective.clone()))?;
        return Ok(Fitted {
            rmse: setup.score(&net)?,
            iterations: config.net.epochs,
            time_sec: start.elapsed().as_secs_f64(),
            trace,
            snapshot: None,
        });
    }

    let pilot = setup.pilot(config)?.0.clone();
    let start = Instant::now();
    let mut last: Option<MkcParams> = None;
    let (net, trace) = {
        let setup_ref = &*setup;
        setup_ref.train_traced(&pilot, config, |chunk, net| {
            let refresh = match config.schedule {
                Schedule::Online => true,
                Schedule::TwoStage => last.is_none(),
            };
            if refresh {
                let cfg = ParamSelectConfig {
                    kmeans_seed: select.kmeans_seed.wrapping_add(chunk as u64),
                    ..select.clone()
                };
                last = Some(determine_params(&setup_ref.residuals(net)?, &cfg)?);
            }
            Ok(TrainObjective::Mkc(last.clone().expect("parameters set above")))
        })?
    };
    let time_sec = start.elapsed().as_secs_f64();
    let params = match last {
        Some(p) => p,
        None => determine_params(&setup.residuals(&pilot)?, select)?,
    };
    Ok(Fitted {
        rmse: setup.score(&net)?,
        iterations: config.net.epochs,
        time_sec,
        trace,
        snapshot: Some(DensitySnapshot {
            errors: setup.residuals(&net)?,
            params,
        }),
    })
}
