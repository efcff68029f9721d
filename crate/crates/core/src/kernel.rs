//! Gaussian kernel and the correntropy family of similarity measures.
//!
//! All kernels here carry the density normalization `1/(sqrt(2*pi)*sigma)`,
//! so a single sub-kernel integrates to one over the error axis.

use std::f64::consts::PI;

use crate::error::{ensure_finite, MkcError, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// Unchecked normalized Gaussian kernel; callers guarantee `sigma > 0`.
#[inline]
pub(crate) fn kappa(e: f64, sigma: f64) -> f64 {
    (-(e * e) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Normalized Gaussian kernel `exp(-e^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)`.
pub fn gaussian_kernel(e: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !e.is_finite() {
        return Err(MkcError::NonFinite("error sample"));
    }
    Ok(kappa(e, sigma))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(MkcError::ParameterDomain(format!(
            "bandwidth must be positive and finite, got {sigma}"
        )))
    }
}

fn check_errors(errors: &[f64]) -> Result<()> {
    if errors.is_empty() {
        return Err(MkcError::EmptyInput("error samples"));
    }
    ensure_finite(errors, "error samples")
}

/// A single error value `e = t - y`. Construction rejects NaN and infinities.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ErrorSample(f64);

impl ErrorSample {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(ErrorSample(value))
        } else {
            Err(MkcError::NonFinite("error sample"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ErrorSample {
    type Error = MkcError;

    fn try_from(value: f64) -> Result<Self> {
        ErrorSample::new(value)
    }
}

/// Free parameters of a multi-kernel correntropy: mixture coefficients,
/// centers and bandwidths of `m` Gaussian sub-kernels.
///
/// Two construction modes exist. Simplex mode requires non-negative
/// coefficients summing to one (the usual definition of a mixture).
/// Unconstrained mode accepts any real coefficients, which is what the
/// regularized coefficient solve in [`crate::params`] produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MkcParams {
    lambdas: Vec<f64>,
    centers: Vec<f64>,
    sigmas: Vec<f64>,
    simplex: bool,
}

impl MkcParams {
    /// Parameters whose coefficients lie on the probability simplex.
    pub fn simplex(lambdas: Vec<f64>, centers: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        let params = Self::build(lambdas, centers, sigmas, true)?;
        if params.lambdas.iter().any(|&l| l < 0.0) {
            return Err(MkcError::ParameterDomain(
                "simplex coefficients must be non-negative".into(),
            ));
        }
        let sum: f64 = params.lambdas.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(MkcError::ParameterDomain(format!(
                "simplex coefficients must sum to 1, got {sum}"
            )));
        }
        Ok(params)
    }

    /// Parameters with sign-unconstrained coefficients.
    pub fn unconstrained(lambdas: Vec<f64>, centers: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        Self::build(lambdas, centers, sigmas, false)
    }

    /// Plain correntropy: one zero-centered kernel with unit weight.
    pub fn correntropy(sigma: f64) -> Result<Self> {
        Self::simplex(vec![1.0], vec![0.0], vec![sigma])
    }

    /// Mixture correntropy: zero-centered kernels with simplex weights.
    pub fn mixture(lambdas: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        let centers = vec![0.0; lambdas.len()];
        Self::simplex(lambdas, centers, sigmas)
    }

    fn build(lambdas: Vec<f64>, centers: Vec<f64>, sigmas: Vec<f64>, simplex: bool) -> Result<Self> {
        let m = lambdas.len();
        if m == 0 {
            return Err(MkcError::EmptyInput("kernel parameters"));
        }
        if centers.len() != m || sigmas.len() != m {
            return Err(MkcError::Shape(format!(
                "lambdas/centers/sigmas lengths differ: {}/{}/{}",
                m,
                centers.len(),
                sigmas.len()
            )));
        }
        ensure_finite(&lambdas, "mixture coefficients")?;
        ensure_finite(&centers, "kernel centers")?;
        for &s in &sigmas {
            check_sigma(s)?;
        }
        Ok(MkcParams {
            lambdas,
            centers,
            sigmas,
            simplex,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn is_simplex(&self) -> bool {
        self.simplex
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.lambdas
            .iter()
            .zip(&self.centers)
            .zip(&self.sigmas)
            .map(|((&l, &c), &s)| (l, c, s))
    }

    /// The multi-Gaussian function `sum_i lambda_i * kappa_{sigma_i}(e - c_i)`.
    pub fn density(&self, e: f64) -> f64 {
        self.terms().map(|(l, c, s)| l * kappa(e - c, s)).sum()
    }

    /// Upper bound `sum_i lambda_i / (sqrt(2 pi) sigma_i)`, valid when all lambdas are non-negative.
    pub fn peak_bound(&self) -> f64 {
        self.terms().map(|(l, _, s)| l * kappa(0.0, s)).sum()
    }

    /// Curvature of the multi-Gaussian at a sub-kernel's own center,
    /// `sum_i |lambda_i| / (sqrt(2 pi) sigma_i^3)`. Used to normalize step sizes.
    pub fn peak_curvature(&self) -> f64 {
        self.terms().map(|(l, _, s)| l.abs() * kappa(0.0, s) / (s * s)).sum()
    }

    /// Mirror image under `e -> -e`: centers negated, sub-kernel order reversed
    /// so that centers stay ascending when they were.
    pub fn negated(&self) -> Self {
        MkcParams {
            lambdas: self.lambdas.iter().rev().copied().collect(),
            centers: self.centers.iter().rev().map(|c| -c).collect(),
            sigmas: self.sigmas.iter().rev().copied().collect(),
            simplex: self.simplex,
        }
    }
}

/// Sample correntropy `(1/N) sum kappa_sigma(e_j)`.
pub fn correntropy_estimate(errors: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_errors(errors)?;
    Ok(errors.iter().map(|&e| kappa(e, sigma)).sum::<f64>() / errors.len() as f64)
}

/// Sample mixture correntropy: zero-centered kernels weighted by `lambdas`.
pub fn mixture_correntropy_estimate(errors: &[f64], lambdas: &[f64], sigmas: &[f64]) -> Result<f64> {
    check_errors(errors)?;
    if lambdas.len() != sigmas.len() || lambdas.is_empty() {
        return Err(MkcError::Shape(format!(
            "{} coefficients for {} bandwidths",
            lambdas.len(),
            sigmas.len()
        )));
    }
    for &s in sigmas {
        check_sigma(s)?;
    }
    let total: f64 = errors
        .iter()
        .map(|&e| {
            lambdas
                .iter()
                .zip(sigmas)
                .map(|(&l, &s)| l * kappa(e, s))
                .sum::<f64>()
        })
        .sum();
    Ok(total / errors.len() as f64)
}

/// Sample multi-kernel correntropy `(1/N) sum_j sum_i lambda_i kappa_{sigma_i}(e_j - c_i)`.
pub fn mkc_estimate(errors: &[f64], params: &MkcParams) -> Result<f64> {
    check_errors(errors)?;
    Ok(errors.iter().map(|&e| params.density(e)).sum::<f64>() / errors.len() as f64)
}

/// Correntropy induced metric `sqrt(kappa_sigma(0) - V_sigma(x, y))`.
pub fn cim(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(MkcError::Shape(format!(
            "cim operands have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(MkcError::EmptyInput("cim operands"));
    }
    ensure_finite(x, "cim operand")?;
    ensure_finite(y, "cim operand")?;
    check_sigma(sigma)?;
    // Averaging kappa(0) - kappa(d) termwise keeps cim(x, x) exactly zero.
    let k0 = kappa(0.0, sigma);
    let gap = x.iter().zip(y).map(|(a, b)| k0 - kappa(a - b, sigma)).sum::<f64>() / x.len() as f64;
    Ok(gap.max(0.0).sqrt())
}

/// Weight `psi(e) = sum_i (lambda_i / sigma_i^2) kappa_{sigma_i}(e - c_i)` of the fixed-point update.
pub fn psi_weight(e: f64, params: &MkcParams) -> f64 {
    params
        .terms()
        .map(|(l, c, s)| l / (s * s) * kappa(e - c, s))
        .sum()
}

/// Offset `zeta(e) = sum_i (lambda_i c_i / sigma_i^2) kappa_{sigma_i}(e - c_i)` of the fixed-point update.
pub fn zeta_weight(e: f64, params: &MkcParams) -> f64 {
    params
        .terms()
        .map(|(l, c, s)| l * c / (s * s) * kappa(e - c, s))
        .sum()
}

/// `psi` and `zeta` together, sharing kernel evaluations.
pub(crate) fn psi_zeta(e: f64, params: &MkcParams) -> (f64, f64) {
    params.terms().fold((0.0, 0.0), |(p, z), (l, c, s)| {
        let w = l / (s * s) * kappa(e - c, s);
        (p + w, z + w * c)
    })
}
