//! Synthetic data: contaminated mixture noise, the two-dimensional linear
//! regression benchmark, Mackey-Glass series, and CSV ingestion with
//! min-max normalization.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{ensure_finite, MkcError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl GaussianComponent {
    pub const fn new(weight: f64, mean: f64, variance: f64) -> Self {
        GaussianComponent {
            weight,
            mean,
            variance,
        }
    }
}

/// `rho = (1 - g) B + g O`: inner Gaussian mixture `B`, Gaussian outlier `O`,
/// Bernoulli gate `g` with `P(g = 1) = outlier_prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub inner: Vec<GaussianComponent>,
    pub outlier_prob: f64,
    /// Outlier `(mean, variance)`.
    pub outlier: (f64, f64),
}

impl NoiseSpec {
    pub fn new(inner: Vec<GaussianComponent>, outlier_prob: f64, outlier: (f64, f64)) -> Result<Self> {
        let spec = NoiseSpec {
            inner,
            outlier_prob,
            outlier,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner.is_empty() {
            return Err(MkcError::Config("noise mixture has no components".into()));
        }
        if self.inner.iter().any(|c| !(c.weight > 0.0) || !(c.variance > 0.0) || !c.mean.is_finite()) {
            return Err(MkcError::Config(
                "mixture weights and variances must be positive".into(),
            ));
        }
        let total: f64 = self.inner.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MkcError::Config(format!("mixture weights sum to {total}, not 1")));
        }
        if !(0.0..=1.0).contains(&self.outlier_prob) {
            return Err(MkcError::Config("outlier probability must lie in [0, 1]".into()));
        }
        if !(self.outlier.1 > 0.0) || !self.outlier.0.is_finite() {
            return Err(MkcError::Config("outlier variance must be positive".into()));
        }
        Ok(())
    }

    /// Inner noise of the linear benchmark with 10% zero-mean outliers of variance 10000.
    ///
    /// 1. `0.5 N(4, 1) + 0.5 N(-4, 1)`
    /// 2. `1/3 N(5, 1) + 2/3 N(-2, 1)`
    /// 3. `0.5 N(0, 1) + 0.5 N(0, 5)`
    pub fn linear_case(case: u8) -> Result<Self> {
        let inner = match case {
            1 => vec![
                GaussianComponent::new(0.5, 4.0, 1.0),
                GaussianComponent::new(0.5, -4.0, 1.0),
            ],
            2 => vec![
                GaussianComponent::new(1.0 / 3.0, 5.0, 1.0),
                GaussianComponent::new(2.0 / 3.0, -2.0, 1.0),
            ],
            3 => vec![
                GaussianComponent::new(0.5, 0.0, 1.0),
                GaussianComponent::new(0.5, 0.0, 5.0),
            ],
            other => return Err(MkcError::Config(format!("unknown noise case {other}"))),
        };
        NoiseSpec::new(inner, 0.1, (0.0, 10000.0))
    }

    /// Time-series noise `0.45 N(-0.05, .) + 0.45 N(0.05, .) + 0.1 N(0, .)`
    /// with standard deviations 0.05, 0.05 and 0.2, no outlier gate.
    pub fn mackey_glass() -> Self {
        NoiseSpec {
            inner: vec![
                GaussianComponent::new(0.45, -0.05, 0.05 * 0.05),
                GaussianComponent::new(0.45, 0.05, 0.05 * 0.05),
                GaussianComponent::new(0.1, 0.0, 0.2 * 0.2),
            ],
            outlier_prob: 0.0,
            outlier: (0.0, 1.0),
        }
    }

    /// Mixture CDF, used for goodness-of-fit checks.
    pub fn cdf(&self, x: f64) -> f64 {
        let p = self.outlier_prob;
        let inner: f64 = self
            .inner
            .iter()
            .map(|c| c.weight * normal_cdf((x - c.mean) / c.variance.sqrt()))
            .sum();
        (1.0 - p) * inner + p * normal_cdf((x - self.outlier.0) / self.outlier.1.sqrt())
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> f64 {
        let gate = self.outlier_prob > 0.0 && rng.gen::<f64>() < self.outlier_prob;
        if gate {
            return gaussian(rng, self.outlier.0, self.outlier.1);
        }
        let mut u = rng.gen::<f64>();
        let last = self.inner.len() - 1;
        for (i, c) in self.inner.iter().enumerate() {
            if u < c.weight || i == last {
                return gaussian(rng, c.mean, c.variance);
            }
            u -= c.weight;
        }
        unreachable!("mixture selection always returns")
    }
}

fn gaussian<R: Rng>(rng: &mut R, mean: f64, variance: f64) -> f64 {
    Normal::new(mean, variance.sqrt())
        .expect("validated variance")
        .sample(rng)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// `n` seeded draws from the contaminated noise model.
pub fn sample_noise(spec: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| spec.sample_with(&mut rng)).collect())
}

/// Per-column `(min, max)` scaling fitted on a training split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        ColumnScale { min, max }
    }

    /// A constant column cannot be rescaled; it maps to zero.
    pub fn is_constant(&self) -> bool {
        !(self.max > self.min)
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub inputs: Vec<ColumnScale>,
    pub target: ColumnScale,
}

impl Normalization {
    pub fn constant_columns(&self) -> Vec<usize> {
        self.inputs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_constant())
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: DMatrix<f64>,
    pub targets: DVector<f64>,
    /// Scaling fitted on the training split; `None` for raw generated data.
    pub normalization: Option<Normalization>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Writes `x1,...,xd,t` with a header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header: Vec<String> = (1..=self.inputs.ncols()).map(|i| format!("x{i}")).collect();
        header.push("t".into());
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for j in 0..self.len() {
            let mut row: Vec<String> = self.inputs.row(j).iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{:.17e}", self.targets[j]));
            w.write_record(&row).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| MkcError::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> MkcError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => MkcError::io(path, io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        MkcError::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// `t_i = beta*^T x_i + rho_i` with `x_i` uniform over the box `input_range`.
pub fn gen_linear_dataset(
    beta_star: &[f64],
    n: usize,
    spec: &NoiseSpec,
    input_range: &[(f64, f64)],
    seed: u64,
) -> Result<Dataset> {
    spec.validate()?;
    if beta_star.len() != input_range.len() {
        return Err(MkcError::Shape(format!(
            "{} weights for a {}-dimensional box",
            beta_star.len(),
            input_range.len()
        )));
    }
    if input_range.iter().any(|&(lo, hi)| !(hi > lo)) {
        return Err(MkcError::Config("input box bounds must satisfy lo < hi".into()));
    }
    let d = beta_star.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = DMatrix::zeros(n, d);
    for j in 0..n {
        for (k, &(lo, hi)) in input_range.iter().enumerate() {
            inputs[(j, k)] = rng.gen_range(lo..hi);
        }
    }
    let beta = DVector::from_column_slice(beta_star);
    let mut targets = &inputs * beta;
    for t in targets.iter_mut() {
        *t += spec.sample_with(&mut rng);
    }
    Ok(Dataset {
        inputs,
        targets,
        normalization: None,
    })
}

/// Which recursion generates the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapForm {
    /// `x(t) = -b x(t-1) + a x(t-tau) / (1 + x(t-tau)^10) + rho_t`.
    /// A contraction for the usual `(a, b)`: every orbit decays to zero.
    AsWritten,
    /// Unit-step Euler discretization of the delay differential equation,
    /// `x(t) = (1 - b) x(t-1) + a x(t-tau) / (1 + x(t-tau)^10) + rho_t`.
    #[default]
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MackeyGlassSpec {
    pub a: f64,
    pub b: f64,
    pub tau: usize,
    /// Driving noise added at every step; `None` for a clean series.
    pub noise: Option<NoiseSpec>,
    pub length: usize,
    pub warmup: usize,
    pub seed: u64,
    pub form: MapForm,
    /// Explicit initial history of length `tau`; `None` draws it uniformly from `[0.1, 1.3]`.
    pub history: Option<Vec<f64>>,
}

impl Default for MackeyGlassSpec {
    fn default() -> Self {
        MackeyGlassSpec {
            a: 0.2,
            b: 0.1,
            tau: 30,
            noise: None,
            length: 1000,
            warmup: 500,
            seed: 0,
            form: MapForm::Euler,
            history: None,
        }
    }
}

pub fn mackey_glass(spec: &MackeyGlassSpec) -> Result<Vec<f64>> {
    if spec.tau == 0 || spec.length == 0 {
        return Err(MkcError::Config("tau and length must be at least 1".into()));
    }
    if spec.warmup < spec.tau {
        return Err(MkcError::Config(format!(
            "warmup ({}) must be at least tau ({})",
            spec.warmup, spec.tau
        )));
    }
    if let Some(noise) = &spec.noise {
        noise.validate()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = match &spec.history {
        Some(h) if h.len() == spec.tau => h.clone(),
        Some(h) => {
            return Err(MkcError::Shape(format!(
                "initial history has length {}, expected tau = {}",
                h.len(),
                spec.tau
            )))
        }
        None => (0..spec.tau).map(|_| rng.gen_range(0.1..1.3)).collect(),
    };
    let total = spec.warmup + spec.length;
    x.reserve(total);
    let carry = match spec.form {
        MapForm::AsWritten => -spec.b,
        MapForm::Euler => 1.0 - spec.b,
    };
    for _ in 0..total {
        let t = x.len();
        let delayed = x[t - spec.tau];
        let mut next = carry * x[t - 1] + spec.a * delayed / (1.0 + delayed.powi(10));
        if let Some(noise) = &spec.noise {
            next += noise.sample_with(&mut rng);
        }
        x.push(next);
    }
    let series = x.split_off(x.len() - spec.length);
    ensure_finite(&series, "Mackey-Glass series")?;
    Ok(series)
}

/// Sliding windows: row `j` is `series[j..j + lag]`, target `series[j + lag]`.
pub fn windowize(series: &[f64], lag: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if lag == 0 {
        return Err(MkcError::Config("lag must be at least 1".into()));
    }
    if series.len() <= lag {
        return Err(MkcError::Shape(format!(
            "series of length {} is too short for lag {lag}",
            series.len()
        )));
    }
    let n = series.len() - lag;
    let inputs = DMatrix::from_fn(n, lag, |j, k| series[j + k]);
    let targets = DVector::from_fn(n, |j, _| series[j + lag]);
    Ok((inputs, targets))
}

/// Numeric table from a CSV file with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str, path: &Path) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| MkcError::Data {
            path: path.to_path_buf(),
            message: format!("no column named `{name}`"),
        })
    }
}

/// Reads a comma-separated file with a header row; every cell must parse as a finite number.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let width = headers.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let mut row = Vec::with_capacity(width);
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| MkcError::Data {
                path: path.to_path_buf(),
                message: format!("row {}, column `{}`: `{cell}` is not numeric", r + 2, &headers[c]),
            })?;
            if !v.is_finite() {
                return Err(MkcError::Data {
                    path: path.to_path_buf(),
                    message: format!("row {}, column `{}`: non-finite value", r + 2, &headers[c]),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Table {
        headers: headers.iter().map(str::to_string).collect(),
        rows,
    })
}

/// Whole file as one dataset: `target_column` as targets, every other column as inputs, no scaling.
pub fn read_dataset(path: &Path, target_column: &str) -> Result<Dataset> {
    let table = read_table(path)?;
    let target_idx = table.column_index(target_column, path)?;
    if table.rows.is_empty() {
        return Err(MkcError::Data {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    let input_cols: Vec<usize> = (0..table.headers.len()).filter(|&c| c != target_idx).collect();
    Ok(Dataset {
        inputs: DMatrix::from_fn(table.rows.len(), input_cols.len(), |j, k| table.rows[j][input_cols[k]]),
        targets: DVector::from_fn(table.rows.len(), |j, _| table.rows[j][target_idx]),
        normalization: None,
    })
}

/// Reads a numeric CSV with a header row, splits rows at random into train and
/// test, and min-max normalizes every column with statistics of the train split.
pub fn load_csv(path: &Path, target_column: &str, split_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(MkcError::Config("split fraction must lie strictly between 0 and 1".into()));
    }
    let table = read_table(path)?;
    let target_idx = table.column_index(target_column, path)?;
    let width = table.headers.len();
    let rows = table.rows;
    if rows.len() < 2 {
        return Err(MkcError::Data {
            path: path.to_path_buf(),
            message: "need at least two data rows to split".into(),
        });
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((rows.len() as f64 * split_fraction).round() as usize).clamp(1, rows.len() - 1);
    let (train_idx, test_idx) = order.split_at(n_train);

    let input_cols: Vec<usize> = (0..width).filter(|&c| c != target_idx).collect();
    let norm = Normalization {
        inputs: input_cols
            .iter()
            .map(|&c| ColumnScale::fit(train_idx.iter().map(|&r| rows[r][c])))
            .collect(),
        target: ColumnScale::fit(train_idx.iter().map(|&r| rows[r][target_idx])),
    };
    let build = |idx: &[usize]| Dataset {
        inputs: DMatrix::from_fn(idx.len(), input_cols.len(), |j, k| {
            norm.inputs[k].apply(rows[idx[j]][input_cols[k]])
        }),
        targets: DVector::from_fn(idx.len(), |j, _| norm.target.apply(rows[idx[j]][target_idx])),
        normalization: Some(norm.clone()),
    };
    Ok((build(train_idx), build(test_idx)))
}
