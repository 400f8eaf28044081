#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use robust_bcs::posterior::HyperState;
use robust_bcs::rng::stream;

/// Standard normal `K x N` matrix and length-`K` vector.
pub fn gaussian_problem(k: usize, n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = stream(seed, "test-problem", 0);
    let theta = DMatrix::from_fn(k, n, |_, _| rng.sample(StandardNormal));
    let y = DVector::from_fn(k, |_, _| rng.sample(StandardNormal));
    (theta, y)
}

/// Random state with `m` active columns out of `n`, precisions in
/// `[0.2, 5]` and noise variance in `[0.05, 1]`.
pub fn random_state(n: usize, m: usize, seed: u64) -> HyperState {
    let mut rng = stream(seed, "test-state", 0);
    let mut active: Vec<usize> = sample(&mut rng, n, m).into_vec();
    active.sort_unstable();
    let alpha = (0..m).map(|_| rng.random_range(0.2..5.0)).collect();
    let sigma2 = rng.random_range(0.05..1.0);
    HyperState::new(active, alpha, sigma2).unwrap()
}

/// Planted `y = Theta w` with `t` nonzeros of magnitude in `[0.5, 2]` and random sign.
pub fn planted(k: usize, n: usize, t: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, Vec<usize>, Vec<f64>) {
    let (theta, _) = gaussian_problem(k, n, seed);
    let mut rng = stream(seed, "test-planted", 0);
    let mut support: Vec<usize> = sample(&mut rng, n, t).into_vec();
    support.sort_unstable();
    let coeffs: Vec<f64> = support
        .iter()
        .map(|_| {
            let m: f64 = rng.random_range(0.5..2.0);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    let mut y = DVector::zeros(k);
    for (&j, &c) in support.iter().zip(&coeffs) {
        y += theta.column(j) * c;
    }
    (theta, y, support, coeffs)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
