//! Feature maps and model forms: plain linear features, random sigmoid
//! (extreme learning machine) features, and a single-hidden-layer network
//! trained by full-batch gradient ascent on a correntropy-type objective.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MkcError, Result};
use crate::kernel::{psi_zeta, MkcParams};

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Returns `x`, optionally with a leading column of ones.
pub fn linear_features(x: &DMatrix<f64>, intercept: bool) -> DMatrix<f64> {
    if intercept {
        x.clone().insert_column(0, 1.0)
    } else {
        x.clone()
    }
}

/// Random hidden layer of an extreme learning machine: weights and biases
/// uniform in `[-1, 1]`, sigmoid activation.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureMap {
    input_weights: DMatrix<f64>,
    biases: DVector<f64>,
    seed: Option<u64>,
}

impl RandomFeatureMap {
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if hidden == 0 || input_dim == 0 {
            return Err(MkcError::Config("feature map needs at least one input and one hidden node".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input_weights = DMatrix::from_fn(hidden, input_dim, |_, _| rng.gen_range(-1.0..=1.0));
        let biases = DVector::from_fn(hidden, |_, _| rng.gen_range(-1.0..=1.0));
        Ok(RandomFeatureMap {
            input_weights,
            biases,
            seed: Some(seed),
        })
    }

    pub fn from_parts(input_weights: DMatrix<f64>, biases: DVector<f64>) -> Result<Self> {
        if input_weights.nrows() != biases.len() || biases.is_empty() {
            return Err(MkcError::Shape(format!(
                "{} hidden weight rows but {} biases",
                input_weights.nrows(),
                biases.len()
            )));
        }
        Ok(RandomFeatureMap {
            input_weights,
            biases,
            seed: None,
        })
    }

    pub fn hidden(&self) -> usize {
        self.biases.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.ncols()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// `H_jl = sigmoid(w_l . x_j + b_l)`.
pub fn elm_features(x: &DMatrix<f64>, map: &RandomFeatureMap) -> Result<DMatrix<f64>> {
    if x.ncols() != map.input_dim() {
        return Err(MkcError::Shape(format!(
            "inputs have {} columns, feature map expects {}",
            x.ncols(),
            map.input_dim()
        )));
    }
    let mut h = x * map.input_weights.transpose();
    for mut row in h.row_iter_mut() {
        for (v, b) in row.iter_mut().zip(map.biases.iter()) {
            *v = sigmoid(*v + b);
        }
    }
    Ok(h)
}

/// Time-delay network: one sigmoid hidden layer, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallNet {
    pub hidden_weights: DMatrix<f64>,
    pub hidden_biases: DVector<f64>,
    pub output_weights: DVector<f64>,
    pub output_bias: f64,
}

pub const TDNN_HIDDEN: usize = 6;

impl SmallNet {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        SmallNet {
            hidden_weights: DMatrix::zeros(hidden, input_dim),
            hidden_biases: DVector::zeros(hidden),
            output_weights: DVector::zeros(hidden),
            output_bias: 0.0,
        }
    }

    /// All parameters uniform in `[-0.5, 0.5]`.
    pub fn random(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = || rng.gen_range(-0.5..=0.5);
        SmallNet {
            hidden_weights: DMatrix::from_fn(hidden, input_dim, |_, _| u()),
            hidden_biases: DVector::from_fn(hidden, |_, _| u()),
            output_weights: DVector::from_fn(hidden, |_, _| u()),
            output_bias: u(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden_weights.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.hidden_weights.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_weights.iter().all(|v| v.is_finite())
            && self.hidden_biases.iter().all(|v| v.is_finite())
            && self.output_weights.iter().all(|v| v.is_finite())
            && self.output_bias.is_finite()
    }

    fn hidden_activations(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut a = x * self.hidden_weights.transpose();
        for mut row in a.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(self.hidden_biases.iter()) {
                *v = sigmoid(*v + b);
            }
        }
        a
    }

    /// Batch prediction, one output per row of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(MkcError::Shape(format!(
                "inputs have {} columns, network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let a = self.hidden_activations(x);
        Ok(a * &self.output_weights + DVector::repeat(x.nrows(), self.output_bias))
    }

    fn axpy(&mut self, step: f64, g: &SmallNet) {
        self.hidden_weights += &g.hidden_weights * step;
        self.hidden_biases += &g.hidden_biases * step;
        self.output_weights += &g.output_weights * step;
        self.output_bias += g.output_bias * step;
    }
}

/// `output_weights . sigmoid(hidden_weights window + hidden_biases) + output_bias`.
pub fn net_forward(net: &SmallNet, window: &[f64]) -> Result<f64> {
    if window.len() != net.input_dim() {
        return Err(MkcError::Shape(format!(
            "window of length {} for a network with {} inputs",
            window.len(),
            net.input_dim()
        )));
    }
    let z = &net.hidden_weights * DVector::from_column_slice(window) + &net.hidden_biases;
    Ok(z.iter()
        .zip(net.output_weights.iter())
        .map(|(&zk, &vk)| vk * sigmoid(zk))
        .sum::<f64>()
        + net.output_bias)
}

/// Objective maximized during training.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainObjective {
    /// `-1/2 mean(e^2)`.
    Mse,
    /// `mean(sum_i lambda_i kappa_{sigma_i}(e - c_i))`.
    Mkc(MkcParams),
}

impl TrainObjective {
    fn value(&self, e: f64) -> f64 {
        match self {
            TrainObjective::Mse => -0.5 * e * e,
            TrainObjective::Mkc(p) => p.density(e),
        }
    }

    /// Derivative of the per-sample objective with respect to the model output.
    fn output_slope(&self, e: f64) -> f64 {
        match self {
            TrainObjective::Mse => e,
            TrainObjective::Mkc(p) => {
                let (psi, zeta) = psi_zeta(e, p);
                psi * e - zeta
            }
        }
    }

    /// Curvature at the objective's peak; steps are divided by it so that
    /// every criterion moves at the pace of the MSE objective near its optimum.
    pub fn curvature(&self) -> f64 {
        match self {
            TrainObjective::Mse => 1.0,
            TrainObjective::Mkc(p) => p.peak_curvature(),
        }
    }
}

/// Mean objective over the batch and its gradient with respect to every network parameter.
pub fn net_objective_gradient(
    net: &SmallNet,
    x: &DMatrix<f64>,
    targets: &DVector<f64>,
    objective: &TrainObjective,
) -> Result<(f64, SmallNet)> {
    if x.nrows() != targets.len() {
        return Err(MkcError::Shape(format!(
            "{} windows but {} targets",
            x.nrows(),
            targets.len()
        )));
    }
    if x.nrows() == 0 {
        return Err(MkcError::EmptyInput("training windows"));
    }
    let n = x.nrows() as f64;
    let a = net.hidden_activations(x);
    let y = &a * &net.output_weights + DVector::repeat(x.nrows(), net.output_bias);
    let e = targets - y;
    let value = e.iter().map(|&v| objective.value(v)).sum::<f64>() / n;
    let g = e.map(|v| objective.output_slope(v) / n);

    let output_weights = a.tr_mul(&g);
    let output_bias = g.sum();
    let mut dz = a;
    for (j, mut row) in dz.row_iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = g[j] * net.output_weights[k] * *v * (1.0 - *v);
        }
    }
    let hidden_weights = dz.tr_mul(x);
    let hidden_biases = DVector::from_iterator(dz.ncols(), dz.column_iter().map(|c| c.sum()));
    Ok((
        value,
        SmallNet {
            hidden_weights,
            hidden_biases,
            output_weights,
            output_bias,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetTrainConfig {
    pub step_size: f64,
    pub epochs: usize,
}

impl Default for NetTrainConfig {
    fn default() -> Self {
        NetTrainConfig {
            step_size: 0.2,
            epochs: 2000,
        }
    }
}

/// Full-batch gradient ascent. The step is `step_size / objective.curvature()`.
pub fn net_train(
    net: &SmallNet,
    x: &DMatrix<f64>,
    targets: &DVector<f64>,
    objective: &TrainObjective,
    config: &NetTrainConfig,
) -> Result<SmallNet> {
    if !(config.step_size >= 0.0 && config.step_size.is_finite()) {
        return Err(MkcError::Config("step size must be non-negative".into()));
    }
    let step = config.step_size / objective.curvature();
    let mut current = net.clone();
    for epoch in 0..config.epochs {
        let (value, grad) = net_objective_gradient(&current, x, targets, objective)?;
        if !value.is_finite() {
            return Err(MkcError::Divergence { iteration: epoch });
        }
        current.axpy(step, &grad);
        if !current.is_finite() {
            return Err(MkcError::Divergence { iteration: epoch + 1 });
        }
    }
    Ok(current)
}

/// Trains under the sample MKC of the prediction errors.
pub fn net_train_mkc(
    net: &SmallNet,
    x: &DMatrix<f64>,
    targets: &DVector<f64>,
    params: &MkcParams,
    config: &NetTrainConfig,
) -> Result<SmallNet> {
    net_train(net, x, targets, &TrainObjective::Mkc(params.clone()), config)
}
