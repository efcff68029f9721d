//! Alternating optimization of the model and the kernel parameters.

use std::fmt;
use std::str::FromStr;

use crate::error::{MkcError, Result};
use crate::kernel::MkcParams;
use crate::params::{determine_params, ParamSelectConfig};
use crate::solver::{fit_mmkcc, fit_mse, mmkcc_fixed_point_step, objective_j, FitReport, LipProblem, SolverConfig};

/// When the kernel parameters are (re)estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Before every fixed-point iteration, from the current residuals.
    #[default]
    Online,
    /// Once, from the residuals of a closed-form MSE pilot fit; then held fixed.
    TwoStage,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Online => "online",
            Schedule::TwoStage => "two-stage",
        })
    }
}

impl FromStr for Schedule {
    type Err = MkcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "online" => Ok(Schedule::Online),
            "two-stage" | "two_stage" | "twostage" => Ok(Schedule::TwoStage),
            other => Err(MkcError::Config(format!("unknown schedule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveFit {
    pub report: FitReport,
    /// Parameters used at each iteration (one entry for the two-stage schedule).
    pub params_trace: Vec<MkcParams>,
}

impl AdaptiveFit {
    pub fn final_params(&self) -> &MkcParams {
        self.params_trace.last().expect("at least one parameter set")
    }
}

/// MMKCC fit whose kernel parameters come from [`determine_params`].
///
/// With [`Schedule::Online`] the objective trace records `J` under the
/// parameters current at each iteration, so consecutive entries may use
/// different kernels; the tolerance test compares `J` before and after the
/// step under the same parameters.
pub fn fit_mmkcc_adaptive(
    problem: &LipProblem,
    select: &ParamSelectConfig,
    config: &SolverConfig,
    schedule: Schedule,
) -> Result<AdaptiveFit> {
    match schedule {
        Schedule::TwoStage => {
            let pilot = fit_mse(problem)?;
            let residuals = problem.residuals(&pilot)?;
            let params = determine_params(residuals.as_slice(), select)?;
            let report = fit_mmkcc(problem, &params, config)?;
            Ok(AdaptiveFit {
                report,
                params_trace: vec![params],
            })
        }
        Schedule::Online => fit_online(problem, select, config),
    }
}

fn fit_online(problem: &LipProblem, select: &ParamSelectConfig, config: &SolverConfig) -> Result<AdaptiveFit> {
    let mut beta = config.start(problem)?;
    let mut objective_trace = Vec::with_capacity(config.max_iters + 1);
    let mut weight_trace = Vec::with_capacity(config.max_iters);
    let mut params_trace = Vec::with_capacity(config.max_iters);
    let mut converged = false;
    let mut iterations_used = 0;
    for k in 1..=config.max_iters {
        let residuals = problem.residuals(&beta)?;
        let iter_select = ParamSelectConfig {
            kmeans_seed: select.kmeans_seed.wrapping_add(k as u64),
            ..select.clone()
        };
        let params = determine_params(residuals.as_slice(), &iter_select)?;
        let j_prev = objective_j(&beta, problem, &params)?;
        if k == 1 {
            objective_trace.push(j_prev);
        }
        beta = mmkcc_fixed_point_step(&beta, problem, &params)?;
        let j = objective_j(&beta, problem, &params)?;
        if !j.is_finite() || beta.iter().any(|v| !v.is_finite()) {
            return Err(MkcError::Divergence { iteration: k });
        }
        objective_trace.push(j);
        weight_trace.push(beta.clone());
        params_trace.push(params);
        iterations_used = k;
        if (j - j_prev).abs() < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(AdaptiveFit {
        report: FitReport {
            weights: beta,
            objective_trace,
            weight_trace,
            iterations_used,
            converged,
        },
        params_trace,
    })
}
