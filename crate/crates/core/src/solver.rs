//! Fixed-point training of linear-in-parameter models under the maximum
//! multi-kernel correntropy criterion, plus the closed-form MSE baseline.
//!
//! MCC and mixture-MCC are not separate code paths: they are the fixed-point
//! solver run with one zero-centered kernel or several zero-centered kernels.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, MkcError, Result};
use crate::kernel::{psi_zeta, MkcParams};
use crate::linalg::solve_symmetric;

/// Regression problem `t ~ H beta` with ridge parameter `gamma'`.
///
/// `gamma'` relates to the penalty weight of the objective by `gamma = gamma' / (2N)`.
#[derive(Debug, Clone)]
pub struct LipProblem {
    features: DMatrix<f64>,
    targets: DVector<f64>,
    reg_gamma_prime: f64,
}

impl LipProblem {
    pub fn new(features: DMatrix<f64>, targets: DVector<f64>, reg_gamma_prime: f64) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(MkcError::EmptyInput("feature matrix"));
        }
        if features.nrows() != targets.len() {
            return Err(MkcError::Shape(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        ensure_finite(features.as_slice(), "feature matrix")?;
        ensure_finite(targets.as_slice(), "targets")?;
        if !(reg_gamma_prime >= 0.0 && reg_gamma_prime.is_finite()) {
            return Err(MkcError::ParameterDomain(format!(
                "regularization must be non-negative, got {reg_gamma_prime}"
            )));
        }
        Ok(LipProblem {
            features,
            targets,
            reg_gamma_prime,
        })
    }

    /// Uses `gamma' = 1e-6 * trace(H^T H) / L`.
    pub fn with_default_regularization(features: DMatrix<f64>, targets: DVector<f64>) -> Result<Self> {
        let gamma = default_gamma_prime(&features);
        Self::new(features, targets, gamma)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn reg_gamma_prime(&self) -> f64 {
        self.reg_gamma_prime
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Residuals `t - H beta`.
    pub fn residuals(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_beta(beta)?;
        Ok(&self.targets - &self.features * beta)
    }

    fn check_beta(&self, beta: &DVector<f64>) -> Result<()> {
        if beta.len() != self.n_features() {
            return Err(MkcError::Shape(format!(
                "weight vector has length {}, model has {} features",
                beta.len(),
                self.n_features()
            )));
        }
        Ok(())
    }
}

pub fn default_gamma_prime(features: &DMatrix<f64>) -> f64 {
    let trace: f64 = features.iter().map(|v| v * v).sum();
    1e-6 * trace / features.ncols().max(1) as f64
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tolerance: f64,
    /// Starting weights; `None` means the zero vector.
    pub initial_weights: Option<DVector<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 100,
            tolerance: 1e-10,
            initial_weights: None,
        }
    }
}

impl SolverConfig {
    pub fn new(max_iters: usize, tolerance: f64) -> Result<Self> {
        let config = SolverConfig {
            max_iters,
            tolerance,
            initial_weights: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_initial_weights(mut self, beta: DVector<f64>) -> Self {
        self.initial_weights = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(MkcError::Config("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(MkcError::Config("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn start(&self, problem: &LipProblem) -> Result<DVector<f64>> {
        self.validate()?;
        match &self.initial_weights {
            Some(beta) => {
                problem.check_beta(beta)?;
                Ok(beta.clone())
            }
            None => Ok(DVector::zeros(problem.n_features())),
        }
    }
}

/// Outcome of a fixed-point fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub weights: DVector<f64>,
    /// `J` at the starting point followed by `J` after every iteration.
    pub objective_trace: Vec<f64>,
    /// Weights after every iteration (the starting point excluded).
    pub weight_trace: Vec<DVector<f64>>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Regularized sample MKC objective
/// `J(beta) = (1/N) sum_j sum_i lambda_i kappa_{sigma_i}(e_j - c_i) - gamma ||beta||^2`.
pub fn objective_j(beta: &DVector<f64>, problem: &LipProblem, params: &MkcParams) -> Result<f64> {
    let e = problem.residuals(beta)?;
    let n = problem.n_samples() as f64;
    let fit = e.iter().map(|&v| params.density(v)).sum::<f64>() / n;
    let gamma = problem.reg_gamma_prime / (2.0 * n);
    Ok(fit - gamma * beta.norm_squared())
}

/// Analytic gradient `(1/N) sum_j (psi(e_j) e_j - zeta(e_j)) h_j^T - (gamma'/N) beta`.
pub fn objective_gradient(beta: &DVector<f64>, problem: &LipProblem, params: &MkcParams) -> Result<DVector<f64>> {
    let e = problem.residuals(beta)?;
    let n = problem.n_samples() as f64;
    let coeff = DVector::from_iterator(
        e.len(),
        e.iter().map(|&v| {
            let (psi, zeta) = psi_zeta(v, params);
            psi * v - zeta
        }),
    );
    Ok(problem.features.tr_mul(&coeff) / n - beta * (problem.reg_gamma_prime / n))
}

/// One fixed-point update: solves `(H^T Lambda H + gamma' I) beta = H^T Lambda T - H^T theta`
/// with `Lambda_jj = psi(e_j)` and `theta_j = zeta(e_j)` evaluated at `beta_prev`.
pub fn mmkcc_fixed_point_step(beta_prev: &DVector<f64>, problem: &LipProblem, params: &MkcParams) -> Result<DVector<f64>> {
    let e = problem.residuals(beta_prev)?;
    let h = &problem.features;
    let l = problem.n_features();
    let mut a = DMatrix::<f64>::zeros(l, l);
    let mut b = DVector::<f64>::zeros(l);
    for (j, &ej) in e.iter().enumerate() {
        let (psi, zeta) = psi_zeta(ej, params);
        let rhs = psi * problem.targets[j] - zeta;
        let row = h.row(j);
        for p in 0..l {
            let hp = row[p];
            b[p] += rhs * hp;
            let w = psi * hp;
            for q in 0..=p {
                a[(p, q)] += w * row[q];
            }
        }
    }
    for p in 0..l {
        a[(p, p)] += problem.reg_gamma_prime;
        for q in 0..p {
            a[(q, p)] = a[(p, q)];
        }
    }
    solve_symmetric(a, &b, problem.reg_gamma_prime > 0.0)
}

/// Fixed-point iteration from the configured start. Stops as soon as the
/// objective changes by less than the tolerance, otherwise after `max_iters` steps.
pub fn fit_mmkcc(problem: &LipProblem, params: &MkcParams, config: &SolverConfig) -> Result<FitReport> {
    let mut beta = config.start(problem)?;
    let mut j_prev = objective_j(&beta, problem, params)?;
    let mut report = FitReport {
        weights: beta.clone(),
        objective_trace: vec![j_prev],
        weight_trace: Vec::new(),
        iterations_used: 0,
        converged: false,
    };
    for k in 1..=config.max_iters {
        beta = mmkcc_fixed_point_step(&beta, problem, params)?;
        let j = objective_j(&beta, problem, params)?;
        if !j.is_finite() || beta.iter().any(|v| !v.is_finite()) {
            return Err(MkcError::Divergence { iteration: k });
        }
        report.objective_trace.push(j);
        report.weight_trace.push(beta.clone());
        report.iterations_used = k;
        if (j - j_prev).abs() < config.tolerance {
            report.converged = true;
            break;
        }
        j_prev = j;
    }
    report.weights = beta;
    Ok(report)
}

/// Closed-form ridge/least-squares solution of `(H^T H + gamma' I) beta = H^T T`.
pub fn fit_mse(problem: &LipProblem) -> Result<DVector<f64>> {
    let h = &problem.features;
    let mut a = h.tr_mul(h);
    for p in 0..a.nrows() {
        a[(p, p)] += problem.reg_gamma_prime;
    }
    let b = h.tr_mul(&problem.targets);
    solve_symmetric(a, &b, problem.reg_gamma_prime > 0.0)
}
