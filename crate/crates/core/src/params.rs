//! Automatic determination of the kernel parameters `(lambda, c, sigma)` from
//! a sample of errors.
//!
//! Centers come from one-dimensional K-means; coefficients from the
//! regularized quadratic program `(K + eta I) lambda = h`; bandwidths from a
//! coordinate-ascent scan over a finite grid. Maximizing
//! `U = -1/2 lambda^T K lambda + lambda^T h` amounts to minimizing the squared
//! L2 distance between the multi-Gaussian and the error density.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite, MkcError, Result};
use crate::kernel::{kappa, MkcParams};
use crate::linalg::solve_symmetric;

const TIE_TOL: f64 = 1e-12;
const KMEANS_MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSelectConfig {
    /// Number of sub-kernels.
    pub m: usize,
    /// Ridge term added to the Gram matrix.
    pub eta: f64,
    /// Candidate bandwidths, strictly ascending.
    pub sigma_grid: Vec<f64>,
    /// Coordinate-ascent sweeps over the bandwidth vector.
    pub sweeps: usize,
    /// Starting bandwidth; `None` uses a MAD scale estimate clipped into the grid.
    pub sigma_init: Option<f64>,
    pub kmeans_seed: u64,
    pub kmeans_restarts: usize,
    /// Errors farther than this many robust scale units (1.4826 * MAD) from the
    /// median are left out of the clustering step only. `None` clusters all errors.
    pub cluster_trim: Option<f64>,
}

impl Default for ParamSelectConfig {
    fn default() -> Self {
        ParamSelectConfig {
            m: 2,
            eta: 1e-4,
            sigma_grid: sigma_grid(0.1, 2.0, 0.2),
            sweeps: 3,
            sigma_init: None,
            kmeans_seed: 0,
            kmeans_restarts: 8,
            cluster_trim: Some(3.0),
        }
    }
}

impl ParamSelectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(MkcError::Config("m must be at least 1".into()));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(MkcError::Config("eta must be non-negative".into()));
        }
        if self.sigma_grid.is_empty() {
            return Err(MkcError::Config("bandwidth grid is empty".into()));
        }
        if self.sigma_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(MkcError::Config("bandwidth grid must be positive".into()));
        }
        if self.sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MkcError::Config("bandwidth grid must be strictly ascending".into()));
        }
        if self.sweeps == 0 || self.kmeans_restarts == 0 {
            return Err(MkcError::Config("sweeps and kmeans_restarts must be positive".into()));
        }
        if let Some(s) = self.sigma_init {
            if !(s > 0.0 && s.is_finite()) {
                return Err(MkcError::Config("sigma_init must be positive".into()));
            }
        }
        if let Some(t) = self.cluster_trim {
            if !(t > 0.0) {
                return Err(MkcError::Config("cluster_trim must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Equally spaced grid `start, start + step, ...` up to and including `stop`
/// (within a relative tolerance of the step). Values are rounded to 12
/// decimals so that, e.g., `0.1 + 9 * 0.2` comes out as `1.9`.
pub fn sigma_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Pairwise integrals `int kappa_{s_i}(x - c_i) kappa_{s_j}(x - c_j) dx` of the sub-kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Positive definiteness via an attempted Cholesky factorization.
    pub fn is_positive_definite(&self) -> bool {
        self.entries.clone().cholesky().is_some()
    }
}

/// Gaussian convolution identity:
/// `K_ij = exp(-(c_i - c_j)^2 / (2 (s_i^2 + s_j^2))) / (sqrt(2 pi) sqrt(s_i^2 + s_j^2))`.
pub fn gram_matrix(c: &[f64], sigma: &[f64]) -> Result<GramMatrix> {
    check_kernel_vectors(c, sigma)?;
    let m = c.len();
    let mut entries = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = gram_entry(c[i], sigma[i], c[j], sigma[j]);
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries })
}

#[inline]
fn gram_entry(ci: f64, si: f64, cj: f64, sj: f64) -> f64 {
    let var = si * si + sj * sj;
    let d = ci - cj;
    (-(d * d) / (2.0 * var)).exp() / ((2.0 * PI).sqrt() * var.sqrt())
}

fn check_kernel_vectors(c: &[f64], sigma: &[f64]) -> Result<()> {
    if c.is_empty() {
        return Err(MkcError::EmptyInput("kernel centers"));
    }
    if c.len() != sigma.len() {
        return Err(MkcError::Shape(format!(
            "{} centers but {} bandwidths",
            c.len(),
            sigma.len()
        )));
    }
    ensure_finite(c, "kernel centers")?;
    if sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(MkcError::ParameterDomain("bandwidths must be positive".into()));
    }
    Ok(())
}

fn check_errors(errors: &[f64]) -> Result<()> {
    if errors.is_empty() {
        return Err(MkcError::EmptyInput("error samples"));
    }
    ensure_finite(errors, "error samples")
}

#[inline]
fn h_component(errors: &[f64], c: f64, s: f64) -> f64 {
    errors.iter().map(|&e| kappa(e - c, s)).sum::<f64>() / errors.len() as f64
}

/// Sample mean of the sub-kernel responses: `h_i = (1/N) sum_j kappa_{s_i}(e_j - c_i)`.
pub fn h_vector(errors: &[f64], c: &[f64], sigma: &[f64]) -> Result<DVector<f64>> {
    check_errors(errors)?;
    check_kernel_vectors(c, sigma)?;
    Ok(DVector::from_iterator(
        c.len(),
        c.iter().zip(sigma).map(|(&ci, &si)| h_component(errors, ci, si)),
    ))
}

/// Regularized coefficient solve `(K + eta I) lambda = h`. No sign constraint.
pub fn solve_lambda(k: &GramMatrix, h: &DVector<f64>, eta: f64) -> Result<DVector<f64>> {
    if h.len() != k.dim() {
        return Err(MkcError::Shape(format!(
            "gram matrix is {}x{} but h has length {}",
            k.dim(),
            k.dim(),
            h.len()
        )));
    }
    if !(eta >= 0.0) {
        return Err(MkcError::ParameterDomain(format!("eta must be non-negative, got {eta}")));
    }
    let mut a = k.entries.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += eta;
    }
    solve_symmetric(a, h, eta > 0.0)
}

/// `U(lambda) = -1/2 lambda^T K lambda + lambda^T h`.
pub fn u_hat(lambda: &DVector<f64>, k: &GramMatrix, h: &DVector<f64>) -> Result<f64> {
    if lambda.len() != k.dim() || h.len() != k.dim() {
        return Err(MkcError::Shape(format!(
            "lambda/h lengths {}/{} for a {}-dimensional gram matrix",
            lambda.len(),
            h.len(),
            k.dim()
        )));
    }
    Ok(-0.5 * lambda.dot(&(&k.entries * lambda)) + lambda.dot(h))
}

/// Bandwidth-selection objective: `U` at the regularized optimal coefficients.
pub fn bandwidth_objective(errors: &[f64], c: &[f64], sigma: &[f64], eta: f64) -> Result<f64> {
    let k = gram_matrix(c, sigma)?;
    let h = h_vector(errors, c, sigma)?;
    let lambda = solve_lambda(&k, &h, eta)?;
    u_hat(&lambda, &k, &h)
}

fn objective_from_h(c: &[f64], sigma: &[f64], h: &DVector<f64>, eta: f64) -> Result<f64> {
    let k = gram_matrix(c, sigma)?;
    let lambda = solve_lambda(&k, h, eta)?;
    u_hat(&lambda, &k, h)
}

/// Result of the coordinate-ascent bandwidth scan.
#[derive(Debug, Clone)]
pub struct BandwidthSearch {
    pub sigmas: Vec<f64>,
    /// Objective at the start followed by its value after every coordinate update.
    pub objective_trace: Vec<f64>,
}

/// Coordinate ascent over `config.sigma_grid`, `config.sweeps` passes in the
/// fixed order `i = 0..m`. Ties within 1e-12 go to the smaller bandwidth.
pub fn select_bandwidths(errors: &[f64], c: &[f64], config: &ParamSelectConfig) -> Result<Vec<f64>> {
    Ok(select_bandwidths_traced(errors, c, config)?.sigmas)
}

pub fn select_bandwidths_traced(errors: &[f64], c: &[f64], config: &ParamSelectConfig) -> Result<BandwidthSearch> {
    config.validate()?;
    check_errors(errors)?;
    if c.len() != config.m {
        return Err(MkcError::Shape(format!(
            "{} centers for m = {}",
            c.len(),
            config.m
        )));
    }
    let grid = &config.sigma_grid;
    let sigma0 = config
        .sigma_init
        .unwrap_or_else(|| robust_scale(errors))
        .clamp(grid[0], grid[grid.len() - 1]);
    let mut sigma = vec![sigma0; config.m];
    let mut h = h_vector(errors, c, &sigma)?;
    let mut current = objective_from_h(c, &sigma, &h, config.eta)?;
    let mut trace = vec![current];

    // Per-coordinate h components only depend on (c_i, s), so cache them per grid value.
    let h_cache: Vec<Vec<f64>> = c
        .iter()
        .map(|&ci| grid.iter().map(|&s| h_component(errors, ci, s)).collect())
        .collect();

    for _ in 0..config.sweeps {
        for i in 0..config.m {
            let mut best: Option<(f64, f64, f64)> = None;
            for (g, &s) in grid.iter().enumerate() {
                sigma[i] = s;
                h[i] = h_cache[i][g];
                let v = objective_from_h(c, &sigma, &h, config.eta)?;
                if best.is_none_or(|(_, _, bv)| v > bv + TIE_TOL) {
                    best = Some((s, h[i], v));
                }
            }
            let (s, hi, v) = best.expect("grid is non-empty");
            sigma[i] = s;
            h[i] = hi;
            current = v;
            trace.push(current);
        }
    }
    Ok(BandwidthSearch {
        sigmas: sigma,
        objective_trace: trace,
    })
}

/// `1.4826 * median(|e - median(e)|)`.
pub fn robust_scale(errors: &[f64]) -> f64 {
    let med = median(errors);
    let dev: Vec<f64> = errors.iter().map(|e| (e - med).abs()).collect();
    1.4826 * median(&dev)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn count_distinct(values: &[f64], cap: usize) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len().min(cap)
}

/// One-dimensional K-means: k-means++ seeding, Lloyd iterations until the
/// assignment is stable, best of `restarts` by within-cluster sum of squares.
/// Returns the centers in ascending order.
pub fn kmeans_1d(errors: &[f64], m: usize, seed: u64, restarts: usize) -> Result<Vec<f64>> {
    check_errors(errors)?;
    if m == 0 || restarts == 0 {
        return Err(MkcError::Config("m and restarts must be positive".into()));
    }
    if count_distinct(errors, m) < m {
        return Err(MkcError::Degenerate(format!(
            "fewer than {m} distinct error values"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..restarts {
        let (wcss, centers) = lloyd(errors, kmeanspp(errors, m, &mut rng));
        if best.as_ref().is_none_or(|(b, _)| wcss < *b) {
            best = Some((wcss, centers));
        }
    }
    let mut centers = best.expect("restarts > 0").1;
    centers.sort_by(f64::total_cmp);
    Ok(centers)
}

fn kmeanspp(x: &[f64], m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = vec![x[rng.gen_range(0..x.len())]];
    let mut d2: Vec<f64> = x.iter().map(|&v| (v - centers[0]).powi(2)).collect();
    while centers.len() < m {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = x.len() - 1;
            for (idx, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = idx;
                    break;
                }
                target -= w;
            }
            x[pick]
        } else {
            x[rng.gen_range(0..x.len())]
        };
        centers.push(next);
        for (d, &v) in d2.iter_mut().zip(x) {
            *d = d.min((v - next).powi(2));
        }
    }
    centers
}

fn nearest(v: f64, centers: &[f64]) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (k, &c) in centers.iter().enumerate() {
        let d = (v - c).abs();
        if d < bd {
            bd = d;
            best = k;
        }
    }
    best
}

fn lloyd(x: &[f64], mut centers: Vec<f64>) -> (f64, Vec<f64>) {
    let m = centers.len();
    let mut assign: Vec<usize> = x.iter().map(|&v| nearest(v, &centers)).collect();
    for _ in 0..KMEANS_MAX_ITERS {
        let mut sums = vec![0.0; m];
        let mut counts = vec![0usize; m];
        for (&v, &a) in x.iter().zip(&assign) {
            sums[a] += v;
            counts[a] += 1;
        }
        for k in 0..m {
            if counts[k] > 0 {
                centers[k] = sums[k] / counts[k] as f64;
            }
        }
        // Empty clusters take the point farthest from its own center.
        for k in 0..m {
            if counts[k] == 0 {
                let (far, _) = x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| counts[assign[*j]] > 1)
                    .map(|(j, &v)| (j, (v - centers[assign[j]]).abs()))
                    .fold((usize::MAX, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                if far != usize::MAX {
                    counts[assign[far]] -= 1;
                    assign[far] = k;
                    counts[k] = 1;
                    centers[k] = x[far];
                }
            }
        }
        let next: Vec<usize> = x.iter().map(|&v| nearest(v, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    let wcss = x
        .iter()
        .zip(&assign)
        .map(|(&v, &a)| (v - centers[a]).powi(2))
        .sum();
    (wcss, centers)
}

/// Full parameter determination: K-means centers, grid-searched bandwidths,
/// then regularized coefficients. Returns unconstrained-mode parameters.
pub fn determine_params(errors: &[f64], config: &ParamSelectConfig) -> Result<MkcParams> {
    config.validate()?;
    check_errors(errors)?;
    if count_distinct(errors, config.m) < config.m {
        return Err(MkcError::Degenerate(format!(
            "fewer than {} distinct error values",
            config.m
        )));
    }
    let centers = kmeans_1d(
        &clustering_sample(errors, config),
        config.m,
        config.kmeans_seed,
        config.kmeans_restarts,
    )?;
    let sigmas = select_bandwidths(errors, &centers, config)?;
    let k = gram_matrix(&centers, &sigmas)?;
    let h = h_vector(errors, &centers, &sigmas)?;
    let lambda = solve_lambda(&k, &h, config.eta)?;
    MkcParams::unconstrained(lambda.iter().copied().collect(), centers, sigmas)
}

fn clustering_sample(errors: &[f64], config: &ParamSelectConfig) -> Vec<f64> {
    let Some(trim) = config.cluster_trim else {
        return errors.to_vec();
    };
    let med = median(errors);
    let bound = trim * robust_scale(errors);
    let kept: Vec<f64> = errors
        .iter()
        .copied()
        .filter(|e| (e - med).abs() <= bound)
        .collect();
    if count_distinct(&kept, config.m) < config.m {
        errors.to_vec()
    } else {
        kept
    }
}
