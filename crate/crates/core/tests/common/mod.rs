#![allow(dead_code)]

use mkc::datagen::{gen_linear_dataset, NoiseSpec};
use mkc::kernel::MkcParams;
use mkc::nalgebra::{DMatrix, DVector};
use mkc::solver::{objective_j, LipProblem};
use rayon::prelude::*;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (SQRT_2PI * sd)
}

/// `integral N(x; c_i, s_i) N(x; c_j, s_j) dx` by adaptive double-exponential
/// quadrature, split at the peak of the product.
pub fn gram_entry_quadrature(ci: f64, si: f64, cj: f64, sj: f64) -> f64 {
    let v = si * si + sj * sj;
    let mu = (ci * sj * sj + cj * si * si) / v;
    let s = si * sj / v.sqrt();
    let f = |x: f64| normal_pdf(x, ci, si) * normal_pdf(x, cj, sj);
    let left = quadrature::integrate(f, mu - 40.0 * s, mu, 1e-15).integral;
    let right = quadrature::integrate(f, mu, mu + 40.0 * s, 1e-15).integral;
    left + right
}

/// `integral g(x) dx` over `[lo, hi]` split into `pieces` adaptive panels.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, pieces: usize) -> f64 {
    let w = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|k| quadrature::integrate(&f, lo + k as f64 * w, lo + (k + 1) as f64 * w, 1e-15).integral)
        .sum()
}

/// Two-weight contaminated linear problem with inputs in `[-2, 2]^2`.
pub fn linear_problem(beta_star: [f64; 2], n: usize, case: u8, seed: u64, gamma_prime: f64) -> (LipProblem, Vec<f64>) {
    let spec = NoiseSpec::linear_case(case).unwrap();
    let ds = gen_linear_dataset(&beta_star, n, &spec, &[(-2.0, 2.0), (-2.0, 2.0)], seed).unwrap();
    let clean = &ds.inputs * DVector::from_column_slice(&beta_star);
    let noise: Vec<f64> = (&ds.targets - clean).iter().copied().collect();
    (LipProblem::new(ds.inputs, ds.targets, gamma_prime).unwrap(), noise)
}

/// Independent iteratively reweighted least squares for zero-centered kernels:
/// `w_j = sum_i lambda_i kappa_i(e_j) / sigma_i^2`, `(H^T W H + gamma' I) beta = H^T W T`.
pub fn reference_mcc_solver(h: &DMatrix<f64>, t: &DVector<f64>, gamma_prime: f64, lambdas: &[f64], sigmas: &[f64], iters: usize) -> DVector<f64> {
    let (n, l) = h.shape();
    let mut beta = vec![0.0; l];
    for _ in 0..iters {
        let mut a = vec![vec![0.0; l]; l];
        let mut b = vec![0.0; l];
        for j in 0..n {
            let pred: f64 = (0..l).map(|p| h[(j, p)] * beta[p]).sum();
            let e = t[j] - pred;
            let w: f64 = lambdas
                .iter()
                .zip(sigmas)
                .map(|(&lam, &s)| lam * normal_pdf(e, 0.0, s) / (s * s))
                .sum();
            for p in 0..l {
                b[p] += w * h[(j, p)] * t[j];
                for q in 0..l {
                    a[p][q] += w * h[(j, p)] * h[(j, q)];
                }
            }
        }
        for (p, row) in a.iter_mut().enumerate() {
            row[p] += gamma_prime;
        }
        beta = gauss_solve(a, b);
    }
    DVector::from_vec(beta)
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(r);
            for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * y;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Best `J` over the grid `[lo, hi]^2` with spacing `step`, and where it occurs.
pub fn grid_oracle(problem: &LipProblem, params: &MkcParams, lo: f64, hi: f64, step: f64) -> (f64, [f64; 2]) {
    let k = ((hi - lo) / step).round() as usize;
    (0..=k)
        .into_par_iter()
        .map(|a| {
            let b0 = lo + a as f64 * step;
            let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
            for c in 0..=k {
                let b1 = lo + c as f64 * step;
                let beta = DVector::from_vec(vec![b0, b1]);
                let j = objective_j(&beta, problem, params).unwrap();
                if j > best.0 {
                    best = (j, [b0, b1]);
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [0.0, 0.0]), |x, y| if y.0 > x.0 { y } else { x })
}
