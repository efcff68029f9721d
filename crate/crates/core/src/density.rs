//! Gaussian kernel density estimates and the squared Euclidean distance
//! between densities, `integral (p - q)^2`, by composite Simpson quadrature.

use crate::error::{ensure_finite, MkcError, Result};
use crate::kernel::MkcParams;
use crate::params::median;

#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl Kde {
    /// Bandwidth from the robust rule of thumb `0.9 min(sd, IQR / 1.34) n^(-1/5)`,
    /// where the standard deviation is replaced by the scaled MAD so that a few
    /// gross outliers do not oversmooth the bulk.
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(MkcError::EmptyInput("density samples"));
        }
        ensure_finite(samples, "density samples")?;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        let iqr = (q(0.75) - q(0.25)) / 1.34;
        let med = median(samples);
        let mad: Vec<f64> = samples.iter().map(|v| (v - med).abs()).collect();
        let spread = (1.4826 * median(&mad)).min(iqr);
        let bandwidth = 0.9 * spread * (samples.len() as f64).powf(-0.2);
        Self::with_bandwidth(samples, bandwidth)
    }

    pub fn with_bandwidth(samples: &[f64], bandwidth: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(MkcError::EmptyInput("density samples"));
        }
        ensure_finite(samples, "density samples")?;
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(MkcError::ParameterDomain(format!(
                "KDE bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut samples = samples.to_vec();
        samples.sort_by(f64::total_cmp);
        Ok(Kde { samples, bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Density at `x`; only samples within 10 bandwidths contribute.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let lo = self.samples.partition_point(|&s| s < x - 10.0 * h);
        let hi = self.samples.partition_point(|&s| s <= x + 10.0 * h);
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * self.samples.len() as f64);
        self.samples[lo..hi]
            .iter()
            .map(|s| {
                let z = (x - s) / h;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm
    }

    /// Interval carrying essentially all of the estimate's mass.
    pub fn support(&self) -> (f64, f64) {
        (
            self.samples[0] - 10.0 * self.bandwidth,
            self.samples[self.samples.len() - 1] + 10.0 * self.bandwidth,
        )
    }
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `integral_lo^hi (p(x) - q(x))^2 dx`.
pub fn l2_distance<P, Q>(p: P, q: Q, lo: f64, hi: f64, intervals: usize) -> f64
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    simpson(
        |x| {
            let d = p(x) - q(x);
            d * d
        },
        lo,
        hi,
        intervals,
    )
}

/// Distance between a fitted kernel mixture and a KDE, integrated over the
/// KDE's support with a step of at most a tenth of the smallest bandwidth involved.
pub fn mixture_kde_distance(params: &MkcParams, kde: &Kde) -> f64 {
    let (lo, hi) = kde.support();
    let finest = params
        .sigmas()
        .iter()
        .copied()
        .fold(kde.bandwidth(), f64::min);
    let intervals = (((hi - lo) / (0.1 * finest)).ceil() as usize).clamp(2, 4_000_000);
    l2_distance(|x| params.density(x), |x| kde.eval(x), lo, hi, intervals)
}
