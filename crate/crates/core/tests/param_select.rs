mod common;

use common::{gram_entry_quadrature, integrate_pieces};
use mkc::datagen::{sample_noise, GaussianComponent, NoiseSpec};
use mkc::density::{mixture_kde_distance, Kde};
use mkc::kernel::MkcParams;
use mkc::nalgebra::DVector;
use mkc::params::{
    bandwidth_objective, determine_params, gram_matrix, h_vector, kmeans_1d, select_bandwidths, select_bandwidths_traced,
    sigma_grid, solve_lambda, u_hat, ParamSelectConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_kernels(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    let c = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let s = (0..m).map(|_| rng.gen_range(0.1..3.0)).collect();
    (c, s)
}

#[test]
fn gram_matrix_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let (c, s) = random_kernels(&mut rng, 3);
        let k = gram_matrix(&c, &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let q = gram_entry_quadrature(c[i], s[i], c[j], s[j]);
                assert!((k.entries()[(i, j)] - q).abs() <= 1e-10, "({i},{j}) c={c:?} s={s:?}");
            }
        }
    }
}

#[test]
fn self_energy_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (c, s) = random_kernels(&mut rng, 2);
        let errors: Vec<f64> = (0..200).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let k = gram_matrix(&c, &s).unwrap();
        let h = h_vector(&errors, &c, &s).unwrap();
        let lambda = solve_lambda(&k, &h, 1e-4).unwrap();
        let params = MkcParams::unconstrained(lambda.iter().copied().collect(), c.clone(), s.clone()).unwrap();
        let quad = integrate_pieces(|x| params.density(x).powi(2), -20.0, 20.0, 400);
        let energy = 0.5 * (lambda.transpose() * k.entries() * &lambda)[(0, 0)];
        assert!((energy - 0.5 * quad).abs() <= 1e-8, "{energy} vs {}", 0.5 * quad);
    }
}

#[test]
fn unregularized_lambda_maximizes_u_hat() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let (c, s) = random_kernels(&mut rng, 3);
        let errors: Vec<f64> = (0..100).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let k = gram_matrix(&c, &s).unwrap();
        let h = h_vector(&errors, &c, &s).unwrap();
        let lambda = solve_lambda(&k, &h, 0.0).unwrap();
        let best = u_hat(&lambda, &k, &h).unwrap();
        for _ in 0..20 {
            let d = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let step = d.normalize() * 1e-3;
            assert!(u_hat(&(&lambda + step), &k, &h).unwrap() <= best);
        }
    }
}

#[test]
fn single_kernel_bandwidth_near_true_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let normal = Normal::new(0.0, 0.25).unwrap();
    let errors: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
    let config = ParamSelectConfig {
        m: 1,
        sigma_grid: sigma_grid(0.1, 2.0, 0.1),
        ..ParamSelectConfig::default()
    };
    let chosen = select_bandwidths(&errors, &[0.0], &config).unwrap()[0];
    let scan = config
        .sigma_grid
        .iter()
        .map(|&s| (s, bandwidth_objective(&errors, &[0.0], &[s], config.eta).unwrap()))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 + 1e-12 { b } else { a });
    assert_eq!(chosen, scan.0);
    assert!([0.2, 0.3, 0.4].contains(&chosen), "selected {chosen}");
}

#[test]
fn coordinate_ascent_never_decreases() {
    let errors = sample_noise(&NoiseSpec::linear_case(2).unwrap(), 2000, 4).unwrap();
    let config = ParamSelectConfig::default();
    let c = kmeans_1d(&errors, 2, 0, 8).unwrap();
    let search = select_bandwidths_traced(&errors, &c, &config).unwrap();
    assert!(search.objective_trace.windows(2).all(|w| w[1] >= w[0]));
    assert!(search.sigmas.iter().all(|s| config.sigma_grid.contains(s)));
}

/// Optimal two-cluster split of one-dimensional data: clusters are contiguous
/// in sorted order, so scanning every cut point is exhaustive.
fn best_two_split(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (mut s, mut q) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    for i in 0..n {
        s[i + 1] = s[i] + v[i];
        q[i + 1] = q[i] + v[i] * v[i];
    }
    let sse = |a: usize, b: usize| {
        let m = (b - a) as f64;
        (q[b] - q[a]) - (s[b] - s[a]).powi(2) / m
    };
    let cut = (1..n)
        .min_by(|&x, &y| (sse(0, x) + sse(x, n)).total_cmp(&(sse(0, y) + sse(y, n))))
        .unwrap();
    (s[cut] / cut as f64, (s[n] - s[cut]) / (n - cut) as f64)
}

#[test]
fn kmeans_matches_exhaustive_split() {
    let mut spec = NoiseSpec::linear_case(1).unwrap();
    spec.outlier_prob = 0.0;
    let errors = sample_noise(&spec, 10_000, 9).unwrap();
    let c = kmeans_1d(&errors, 2, 0, 8).unwrap();
    let (lo, hi) = best_two_split(&errors);
    assert!((c[0] - lo).abs() < 1e-9 && (c[1] - hi).abs() < 1e-9);
    assert!((c[0] + 4.0).abs() <= 0.15 && (c[1] - 4.0).abs() <= 0.15, "{c:?}");
    let p = determine_params(&errors, &ParamSelectConfig::default()).unwrap();
    assert!((p.centers()[0] + 4.0).abs() <= 0.15 && (p.centers()[1] - 4.0).abs() <= 0.15);
}

#[test]
fn sign_flip_equivariance() {
    for case in 1..=3 {
        let errors = sample_noise(&NoiseSpec::linear_case(case).unwrap(), 1500, 40 + case as u64).unwrap();
        let flipped: Vec<f64> = errors.iter().map(|e| -e).collect();
        let config = ParamSelectConfig::default();
        let a = determine_params(&errors, &config).unwrap();
        let b = determine_params(&flipped, &config).unwrap();
        let mirror = a.negated();
        for (x, y) in mirror.centers().iter().zip(b.centers()) {
            assert!((x - y).abs() < 1e-9, "case {case}: {:?} vs {:?}", mirror.centers(), b.centers());
        }
        assert_eq!(mirror.sigmas(), b.sigmas());
        for (x, y) in mirror.lambdas().iter().zip(b.lambdas()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

fn best_single_distance(kde: &Kde, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&s| mixture_kde_distance(&MkcParams::correntropy(s).unwrap(), kde))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn fitted_density_beats_single_gaussian() {
    let errors = sample_noise(&NoiseSpec::linear_case(1).unwrap(), 5000, 12).unwrap();
    let config = ParamSelectConfig::default();
    let p = determine_params(&errors, &config).unwrap();
    let kde = Kde::new(&errors).unwrap();
    assert!(mixture_kde_distance(&p, &kde) < best_single_distance(&kde, &config.sigma_grid));
}

#[test]
fn asymmetric_mixture_is_matched() {
    let errors = sample_noise(&NoiseSpec::linear_case(2).unwrap(), 10_000, 13).unwrap();
    let p = determine_params(&errors, &ParamSelectConfig::default()).unwrap();
    let kde = Kde::new(&errors).unwrap();
    let d = mixture_kde_distance(&p, &kde);
    assert!(d <= 0.01, "distance {d}");
}

#[test]
fn three_kernels_find_three_modes() {
    let spec = NoiseSpec::new(
        vec![
            GaussianComponent::new(0.3, -6.0, 0.5),
            GaussianComponent::new(0.4, 0.0, 0.5),
            GaussianComponent::new(0.3, 6.0, 0.5),
        ],
        0.0,
        (0.0, 1.0),
    )
    .unwrap();
    let errors = sample_noise(&spec, 6000, 3).unwrap();
    let p = determine_params(&errors, &ParamSelectConfig { m: 3, ..ParamSelectConfig::default() }).unwrap();
    for (c, want) in p.centers().iter().zip([-6.0, 0.0, 6.0]) {
        assert!((c - want).abs() < 0.1, "{:?}", p.centers());
    }
}
