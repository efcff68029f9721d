mod common;

use common::{grid_oracle, linear_problem, reference_mcc_solver};
use mkc::kernel::MkcParams;
use mkc::nalgebra::{DMatrix, DVector};
use mkc::params::{determine_params, ParamSelectConfig};
use mkc::schedule::{fit_mmkcc_adaptive, Schedule};
use mkc::solver::{fit_mmkcc, objective_gradient, LipProblem, SolverConfig};
use proptest::prelude::*;

// The solver may stop early once J no longer changes in floating point, so
// the reference runs for the same number of iterations.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mcc_matches_reference_solver(seed in 0u64..1000, case in 1u8..=3, sigma in 1.0f64..10.0, gamma_prime in 0.0f64..1.0) {
        let (problem, _) = linear_problem([1.0, 2.0], 60, case, seed, gamma_prime);
        let params = MkcParams::correntropy(sigma).unwrap();
        let cfg = SolverConfig { max_iters: 15, tolerance: 1e-300, initial_weights: None };
        let ours = fit_mmkcc(&problem, &params, &cfg).unwrap();
        let reference = reference_mcc_solver(problem.features(), problem.targets(), gamma_prime, &[1.0], &[sigma], ours.iterations_used);
        prop_assert!((ours.weights - reference).amax() <= 1e-8);
    }

    #[test]
    fn mmcc_matches_reference_solver(seed in 0u64..1000, case in 1u8..=3, l in 0.1f64..0.9, s1 in 1.0f64..5.0, s2 in 5.0f64..15.0) {
        let (problem, _) = linear_problem([1.0, 2.0], 60, case, seed, 0.1);
        let params = MkcParams::mixture(vec![l, 1.0 - l], vec![s1, s2]).unwrap();
        let cfg = SolverConfig { max_iters: 15, tolerance: 1e-300, initial_weights: None };
        let ours = fit_mmkcc(&problem, &params, &cfg).unwrap();
        let reference = reference_mcc_solver(problem.features(), problem.targets(), 0.1, &[l, 1.0 - l], &[s1, s2], ours.iterations_used);
        prop_assert!((ours.weights - reference).amax() <= 1e-8);
    }
}

#[test]
fn converged_fit_is_stationary() {
    for seed in 0..10 {
        let case = (seed % 3 + 1) as u8;
        let (problem, noise) = linear_problem([1.0, 2.0], 200, case, seed, 0.5);
        let params = determine_params(&noise, &ParamSelectConfig::default()).unwrap();
        let fit = fit_mmkcc(&problem, &params, &SolverConfig::new(1000, 1e-16).unwrap()).unwrap();
        let g = objective_gradient(&fit.weights, &problem, &params).unwrap();
        assert!(g.norm() <= 1e-6 * (1.0 + fit.weights.norm()), "seed {seed}: gradient {}", g.norm());
    }
}

#[test]
fn grid_oracle_finds_nothing_better() {
    for seed in 0..3 {
        let case = (seed % 3 + 1) as u8;
        let (problem, noise) = linear_problem([1.0, 2.0], 60, case, 500 + seed, 0.0);
        let params = determine_params(&noise, &ParamSelectConfig::default()).unwrap();
        let fit = fit_mmkcc(&problem, &params, &SolverConfig::new(500, 1e-15).unwrap()).unwrap();
        let j_fit = *fit.objective_trace.last().unwrap();
        let (j_grid, at) = grid_oracle(&problem, &params, -3.0, 5.0, 0.02);
        assert!(j_grid <= j_fit + 1e-4, "seed {seed}: grid {j_grid} at {at:?} vs fit {j_fit}");
    }
}

#[test]
fn target_shift_moves_only_the_offset() {
    for seed in 0..5 {
        let (base, _) = linear_problem([1.0, 2.0], 200, 2, seed, 0.0);
        let h = base.features().clone().insert_column(0, 1.0);
        let delta = 3.0;
        let p0 = LipProblem::with_default_regularization(h.clone(), base.targets().clone()).unwrap();
        let p1 = LipProblem::with_default_regularization(h, base.targets().add_scalar(delta)).unwrap();
        let cfg = SolverConfig::new(10, 1e-10).unwrap();
        let select = ParamSelectConfig::default();
        let a = fit_mmkcc_adaptive(&p0, &select, &cfg, Schedule::Online).unwrap();
        let b = fit_mmkcc_adaptive(&p1, &select, &cfg, Schedule::Online).unwrap();
        let (wa, wb) = (&a.report.weights, &b.report.weights);
        assert!((wa.rows(1, 2) - wb.rows(1, 2)).amax() < 1e-6, "slopes {wa} vs {wb}");
        // the shift is split between the intercept weight and the kernel centers
        let moved = wb[0] - wa[0];
        for (ca, cb) in a.final_params().centers().iter().zip(b.final_params().centers()) {
            assert!((cb - ca + moved - delta).abs() < 1e-6, "centers {ca} -> {cb}, intercept moved {moved}");
        }
    }
}

#[test]
fn identity_design() {
    let t = DVector::from_vec(vec![0.5, -1.0, 2.0]);
    let problem = LipProblem::new(DMatrix::identity(3, 3), t.clone(), 0.0).unwrap();
    assert!((mkc::solver::fit_mse(&problem).unwrap() - t).amax() < 1e-12);
}
