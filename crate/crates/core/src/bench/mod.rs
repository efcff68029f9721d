//! Monte-Carlo benchmark harness: experiment configuration, the run loop and
//! CSV/SVG reports.

mod config;
mod report;
mod run;

pub use config::{Baselines, Criterion, ExperimentConfig, ExperimentKind};
pub use report::{emit_report, histogram_svg, line_plot_svg};
pub use run::{run_experiment, BenchResult, CriterionSummary, DensitySnapshot, FlaggedRun, RunRecord};

use crate::error::{MkcError, Result};
use nalgebra::DVector;

/// `sqrt(||beta - beta_star||^2 / d)`.
pub fn rmse_weights(beta: &DVector<f64>, beta_star: &DVector<f64>) -> Result<f64> {
    if beta.len() != beta_star.len() {
        return Err(MkcError::Shape(format!(
            "weights of length {} against reference of length {}",
            beta.len(),
            beta_star.len()
        )));
    }
    if beta.is_empty() {
        return Err(MkcError::EmptyInput("weights"));
    }
    Ok(((beta - beta_star).norm_squared() / beta.len() as f64).sqrt())
}

/// `sqrt(mean((y - t)^2))`.
pub fn rmse_predictions(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(MkcError::Shape(format!(
            "{} predictions against {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(MkcError::EmptyInput("predictions"));
    }
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(y, t)| (y - t) * (y - t))
        .sum();
    Ok((sse / predictions.len() as f64).sqrt())
}
