//! Dual-path checks of the Gaussian-model algebra against dense references.

mod common;

use common::{gaussian_problem, max_abs_diff, random_state, rel_diff};
use nalgebra::{DMatrix, DVector};
use robust_bcs::oracle;
use robust_bcs::posterior::{self, FactorPair, HyperState, Precision};

const INSTANCES: u64 = 60;

fn sizes(seed: u64) -> (usize, usize, usize) {
    let k = 3 + (seed as usize * 7) % 10; // 3..=12
    let n = k + 4 + (seed as usize % 5);
    let m = 1 + (seed as usize * 3) % 8; // 1..=8
    (k, n, m.min(n))
}

#[test]
fn direct_and_woodbury_covariances_agree() {
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, seed);
        let state = random_state(n, m, seed);
        let ta = posterior::active_columns(&theta, &state.active);
        let d = posterior::posterior_moments_direct(&ta, &y, &state).unwrap();
        let w = posterior::posterior_moments_woodbury(&ta, &y, &state).unwrap();
        assert!(max_abs_diff(&d.sigma, &w.sigma) < 1e-10, "seed {seed}");
        assert!((&d.mu - &w.mu).amax() < 1e-10, "seed {seed}");
    }
}

#[test]
fn c_inverse_matches_dense_inverse() {
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 100 + seed);
        let state = random_state(n, m, 100 + seed);
        let ta = posterior::active_columns(&theta, &state.active);
        let post = posterior::posterior_moments(&ta, &y, &state).unwrap();
        let fast = posterior::c_inverse_woodbury(&ta, &state, &post);
        let dense = oracle::dense_c_inverse(&theta, &state).unwrap();
        assert!(max_abs_diff(&fast, &dense) < 1e-10, "seed {seed}");
    }
}

#[test]
fn quadratic_form_identity() {
    // y^T C^-1 y = sigma^-2 ||y - Theta mu||^2 + mu^T A mu
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 200 + seed);
        let state = random_state(n, m, 200 + seed);
        let ta = posterior::active_columns(&theta, &state.active);
        let post = posterior::posterior_moments(&ta, &y, &state).unwrap();
        let lhs = y.dot(&(oracle::dense_c_inverse(&theta, &state).unwrap() * &y));
        let resid = (&y - &ta * &post.mu).norm_squared() / state.sigma2;
        let prior: f64 = post.mu.iter().zip(&state.alpha).map(|(m, a)| a * m * m).sum();
        assert!(rel_diff(lhs, resid + prior) < 1e-9, "seed {seed}: {lhs} vs {}", resid + prior);
    }
}

#[test]
fn log_evidence_matches_dense() {
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 300 + seed);
        let state = random_state(n, m, 300 + seed);
        let fast = posterior::log_evidence(&theta, &y, &state, false).unwrap();
        let dense = oracle::dense_log_evidence(&theta, &y, &state).unwrap();
        assert!(rel_diff(fast, dense) < 1e-10, "seed {seed}: {fast} vs {dense}");
    }
}

#[test]
fn log_evidence_overfull_model_matches_dense() {
    // more active terms than measurements exercises the Woodbury determinant path
    for seed in 0..20 {
        let (theta, y) = gaussian_problem(5, 12, 350 + seed);
        let state = random_state(12, 9, 350 + seed);
        let fast = posterior::log_evidence(&theta, &y, &state, false).unwrap();
        let dense = oracle::dense_log_evidence(&theta, &y, &state).unwrap();
        assert!(rel_diff(fast, dense) < 1e-10, "seed {seed}");
    }
}

fn without(state: &HyperState, n: usize) -> HyperState {
    let mut s = state.clone();
    s.set_precision(n, Precision::Inactive);
    s
}

fn with_alpha(state: &HyperState, n: usize, a: f64) -> HyperState {
    let mut s = state.clone();
    s.set_precision(n, Precision::Finite(a));
    s
}

#[test]
fn per_term_gain_matches_evidence_difference() {
    let mut checked = 0;
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 400 + seed);
        let state = random_state(n, m, 400 + seed);
        let l0 = posterior::log_evidence(&theta, &y, &state, false).unwrap();
        for j in 0..n {
            let f = posterior::factors(&theta, &y, &state, j).unwrap();
            match state.precision(j) {
                Precision::Finite(a) => {
                    // removing the term costs exactly l(alpha)
                    let l_del = posterior::log_evidence(&theta, &y, &without(&state, j), false).unwrap();
                    let gain = posterior::per_term_gain(Precision::Finite(a), f);
                    assert!((l0 - l_del - gain).abs() < 1e-8, "seed {seed} term {j}");
                    // re-estimation to 2a
                    let l_re = posterior::log_evidence(&theta, &y, &with_alpha(&state, j, 2.0 * a), false).unwrap();
                    let d = posterior::per_term_gain(Precision::Finite(2.0 * a), f) - gain;
                    assert!((l_re - l0 - d).abs() < 1e-8, "seed {seed} term {j}");
                }
                Precision::Inactive => {
                    let a = 0.7;
                    let l_add = posterior::log_evidence(&theta, &y, &with_alpha(&state, j, a), false).unwrap();
                    let gain = posterior::per_term_gain(Precision::Finite(a), f);
                    assert!((l_add - l0 - gain).abs() < 1e-8, "seed {seed} term {j}");
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 50);
}

#[test]
fn evidence_decomposition_identity() {
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 500 + seed);
        let state = random_state(n, m, 500 + seed);
        let l = posterior::log_evidence(&theta, &y, &state, false).unwrap();
        let b = posterior::evidence_decomposition(&theta, &y, &state).unwrap();
        assert!((b.log_evidence - b.data_fit + b.kl_info).abs() < 1e-8);
        assert!((l - (b.data_fit - b.kl_info)).abs() < 1e-8, "seed {seed}");
        assert!(b.kl_info >= -1e-10);
    }
}

#[test]
fn kl_vanishes_without_data() {
    let theta = DMatrix::zeros(4, 3);
    let y = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.5]);
    let state = HyperState::new(vec![0, 2], vec![1.5, 0.4], 0.3).unwrap();
    let b = posterior::evidence_decomposition(&theta, &y, &state).unwrap();
    assert!(b.kl_info.abs() < 1e-12);
}

#[test]
fn active_factor_conversion_matches_explicit_leave_one_out() {
    for seed in 0..30 {
        let (theta, y) = gaussian_problem(6, 10, 600 + seed);
        let state = random_state(10, 3, 600 + seed);
        for j in 0..10 {
            let fast = posterior::factors(&theta, &y, &state, j).unwrap();
            let dense = oracle::dense_factors(&theta, &y, &state, j).unwrap();
            assert!(rel_diff(fast.s_factor, dense.s_factor) < 1e-8, "seed {seed} term {j}");
            assert!(rel_diff(fast.q_factor, dense.q_factor) < 1e-8, "seed {seed} term {j}");
        }
    }
}

#[test]
fn full_c_factors_match_dense_quadratic_forms() {
    let (theta, y) = gaussian_problem(8, 14, 700);
    let state = random_state(14, 4, 700);
    let ta = posterior::active_columns(&theta, &state.active);
    let post = posterior::posterior_moments(&ta, &y, &state).unwrap();
    let (s, q) = posterior::full_c_factors(&theta, &y, &state, &post);
    let c_inv = oracle::dense_c_inverse(&theta, &state).unwrap();
    for j in 0..14 {
        let col = theta.column(j).clone_owned();
        let ci = &c_inv * &col;
        assert!(rel_diff(s[j], col.dot(&ci)) < 1e-10);
        assert!(rel_diff(q[j], ci.dot(&y)) < 1e-10);
    }
}

#[test]
fn quality_factor_prefactor_is_inverse_noise_variance() {
    // Q_n = sigma^-2 Theta_n^T (y - Theta_{-n} mu_{-n}); a sigma^2 prefactor
    // only agrees when sigma2 = 1.
    let (theta, y) = gaussian_problem(7, 9, 800);
    let state = HyperState::new(vec![1, 4, 6], vec![0.8, 1.7, 2.5], 0.3).unwrap();
    for j in [4usize, 2] {
        let rest = without(&state, j);
        let ta = posterior::active_columns(&theta, &rest.active);
        let post = posterior::posterior_moments(&ta, &y, &rest).unwrap();
        let resid = &y - &ta * &post.mu;
        let dot = theta.column(j).dot(&resid);
        let q = posterior::factors(&theta, &y, &state, j).unwrap().q_factor;
        assert!(rel_diff(q, dot / rest.sigma2) < 1e-10);
        assert!((q / (dot * rest.sigma2) - 1.0).abs() > 0.5);
    }
}

#[test]
fn posterior_mean_minimizes_penalized_residual() {
    let (theta, y) = gaussian_problem(6, 8, 900);
    let state = HyperState::new(vec![0, 3, 5], vec![0.5, 2.0, 1.2], 0.4).unwrap();
    let ta = posterior::active_columns(&theta, &state.active);
    let post = posterior::posterior_moments(&ta, &y, &state).unwrap();
    let obj = |w: &DVector<f64>| {
        (&y - &ta * w).norm_squared() / state.sigma2
            + w.iter().zip(&state.alpha).map(|(v, a)| a * v * v).sum::<f64>()
    };
    let mut grad2 = 0.0;
    for i in 0..3 {
        let g = oracle::finite_difference(
            |t| {
                let mut w = post.mu.clone();
                w[i] = t;
                obj(&w)
            },
            post.mu[i],
            1e-5,
        );
        grad2 += g * g;
    }
    assert!(grad2.sqrt() < 1e-6, "{}", grad2.sqrt());
}

#[test]
fn scalar_posterior_and_empty_evidence() {
    let theta = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, -1.0]);
    let y = DVector::from_vec(vec![0.5, 1.0, 0.2]);
    let state = HyperState::new(vec![0], vec![2.0], 0.5).unwrap();
    let post = posterior::posterior_moments(&theta, &y, &state).unwrap();
    let s = 1.0 / (6.0 / 0.5 + 2.0);
    assert!((post.sigma[(0, 0)] - s).abs() < 1e-15);
    assert!((post.mu[0] - s * theta.column(0).dot(&y) / 0.5).abs() < 1e-14);

    let empty = HyperState::empty(0.5);
    let l = posterior::log_evidence(&theta, &y, &empty, false).unwrap();
    let expect = -0.5 * (3.0 * (2.0 * std::f64::consts::PI).ln() + 3.0 * 0.5f64.ln() + y.norm_squared() / 0.5);
    assert!((l - expect).abs() < 1e-12);
    let f = posterior::factors(&theta, &y, &empty, 0).unwrap();
    assert!((f.s_factor - 6.0 / 0.5).abs() < 1e-12);
    assert!((f.q_factor - theta.column(0).dot(&y) / 0.5).abs() < 1e-12);
}

#[test]
fn optimal_alpha_beats_a_log_grid() {
    let f = FactorPair { s_factor: 1.3, q_factor: 2.1 };
    let Precision::Finite(best) = posterior::optimal_alpha(f) else { panic!("expected finite") };
    let l_best = posterior::per_term_gain(Precision::Finite(best), f);
    for i in 0..10_000 {
        let a = 10f64.powf(-6.0 + 12.0 * i as f64 / 9_999.0);
        assert!(posterior::per_term_gain(Precision::Finite(a), f) <= l_best + 1e-15);
    }
    let one = FactorPair { s_factor: 1.0, q_factor: 2f64.sqrt() };
    match posterior::optimal_alpha(one) {
        Precision::Finite(a) => assert!((a - 1.0).abs() < 1e-12),
        Precision::Inactive => panic!("expected finite"),
    }
    assert_eq!(posterior::optimal_alpha(FactorPair { s_factor: 2.0, q_factor: 1.0 }), Precision::Inactive);
}

#[test]
fn returned_covariances_are_positive_definite() {
    for seed in 0..INSTANCES {
        let (k, n, m) = sizes(seed);
        let (theta, y) = gaussian_problem(k, n, 1000 + seed);
        let state = random_state(n, m, 1000 + seed);
        let ta = posterior::active_columns(&theta, &state.active);
        let post = posterior::posterior_moments(&ta, &y, &state).unwrap();
        assert!(max_abs_diff(&post.sigma, &post.sigma.transpose()) < 1e-12);
        assert!(nalgebra::Cholesky::new(post.sigma.clone()).is_some());
    }
}
