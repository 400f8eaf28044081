use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use robust_bcs::metrics::{self, ErrorBarMean, TrialRecord};
use robust_bcs::rng::stream;
use robust_bcs::signalgen::{self, haar, Basis, BasisKind, Signal, SparseCoefficients};

#[test]
fn haar_is_orthonormal_up_to_1024() {
    for m in 0..=10 {
        let n = 1usize << m;
        let psi = Basis::new(BasisKind::Haar, n).unwrap().to_dense().unwrap();
        let err = (psi.transpose() * &psi - DMatrix::identity(n, n)).abs().max();
        assert!(err < 1e-10, "n = {n}: {err:e}");
    }
}

#[test]
fn haar_round_trip_on_random_signals() {
    let mut rng = stream(4, "haar-round-trip", 0);
    for i in 0..100 {
        let n = 1usize << (1 + i % 10);
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let back = haar::inverse(&haar::forward(&x).unwrap()).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err:e}");
    }
}

#[test]
fn fast_transform_matches_dense_matrix() {
    let n = 32;
    let psi = haar::dense_matrix(n).unwrap();
    let mut rng = stream(5, "haar-dense", 0);
    let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let dense = &psi * DVector::from_vec(w.clone());
    let fast = haar::inverse(&w).unwrap();
    for i in 0..n {
        assert!((dense[i] - fast[i]).abs() < 1e-12);
    }
}

#[test]
fn constant_signal_has_one_haar_coefficient() {
    let basis = Basis::new(BasisKind::Haar, 16).unwrap();
    let w = signalgen::basis_forward(&basis, &Signal::new(vec![2.5; 16]).unwrap()).unwrap();
    assert_eq!(w.nonzero_count(), 1);
    assert!(Basis::new(BasisKind::Haar, 12).is_err());
}

#[test]
fn design_matrix_composes_projection_and_synthesis() {
    let n = 64;
    let basis = Basis::new(BasisKind::Haar, n).unwrap();
    let phi = signalgen::gen_projection(20, n, 6).unwrap();
    let theta = signalgen::design_matrix(&phi, &basis).unwrap();
    assert_eq!(theta.shape(), (20, n));
    let mut rng = stream(6, "compose", 0);
    for _ in 0..10 {
        let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let x = DVector::from_vec(basis.synthesize(&w).unwrap());
        let diff = (&theta * DVector::from_vec(w) - &phi.entries * x).amax();
        assert!(diff < 1e-10);
    }
    assert_eq!(signalgen::design_matrix(&phi, &Basis::identity(n)).unwrap(), phi.entries);
}

#[test]
fn injected_noise_has_the_requested_scale() {
    let n = 64;
    let x = signalgen::gen_spikes(n, 6, signalgen::SpikeKind::Gaussian, 2).unwrap();
    let phi = signalgen::gen_projection(100, n, 3).unwrap();
    let clean = &phi.entries * x.values();
    let target = 0.05 * signalgen::rms(clean.as_slice());
    let mut ss = 0.0;
    let mut count = 0usize;
    for trial in 0..100u64 {
        let y = signalgen::compress(&phi, &x, 0.05, trial).unwrap();
        ss += (&y.values - &clean).norm_squared();
        count += y.values.len();
    }
    let std = (ss / count as f64).sqrt();
    assert!((std / target - 1.0).abs() < 0.05, "{std} vs {target}");
}

#[test]
fn hard_threshold_matches_direct_scan() {
    let mut rng = stream(7, "threshold", 0);
    let v: Vec<f64> = (0..256).map(|_| 1e-3 * rng.sample::<f64, _>(StandardNormal)).collect();
    let w = SparseCoefficients::new(v.clone(), BasisKind::Haar).unwrap();
    let (t, survivors) = signalgen::hard_threshold(&w, 1e-4).unwrap();
    assert_eq!(survivors, v.iter().filter(|x| x.abs() >= 1e-4).count());
    for (a, b) in v.iter().zip(t.values.iter()) {
        assert_eq!(*b, if a.abs() < 1e-4 { 0.0 } else { *a });
    }
}

#[test]
fn reconstruction_error_is_scale_invariant() {
    let x = Signal::new(vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    let xh = Signal::new(vec![0.9, -2.1, 0.4, 3.3]).unwrap();
    let base = metrics::reconstruction_error(&xh, &x).unwrap();
    for c in [-3.0, 1e-4, 250.0] {
        let s = |v: &Signal| Signal::new(v.as_slice().iter().map(|a| a * c).collect()).unwrap();
        let scaled = metrics::reconstruction_error(&s(&xh), &s(&x)).unwrap();
        assert!((scaled / base - 1.0).abs() < 1e-12);
    }
}

#[test]
fn error_bars_are_permutation_invariant() {
    let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.5]);
    let basis = Basis::new(BasisKind::Haar, 8).unwrap();
    let a = metrics::error_bars(&sigma, &basis, &[1, 4, 6], ErrorBarMean::AllSamples).unwrap();
    // reorder the active set and permute the covariance consistently
    let perm = [2usize, 0, 1];
    let sp = DMatrix::from_fn(3, 3, |i, j| sigma[(perm[i], perm[j])]);
    let b = metrics::error_bars(&sp, &basis, &[6, 1, 4], ErrorBarMean::AllSamples).unwrap();
    for (u, v) in a.bars.iter().zip(&b.bars) {
        assert!((u - v).abs() < 1e-14);
    }
    // explicit triple product
    let psi = basis.to_dense().unwrap();
    let mut full = DMatrix::zeros(8, 8);
    for (i, &p) in [1usize, 4, 6].iter().enumerate() {
        for (j, &q) in [1usize, 4, 6].iter().enumerate() {
            full[(p, q)] = sigma[(i, j)];
        }
    }
    let cov = &psi * full * psi.transpose();
    for s in 0..8 {
        assert!((a.bars[s] - cov[(s, s)].sqrt()).abs() < 1e-10);
    }
}

#[test]
fn acceptance_rate_is_monotone_in_threshold() {
    let mut rng = stream(8, "acceptance", 0);
    let records: Vec<TrialRecord> = (0..50)
        .map(|i| TrialRecord {
            k_meas: 10,
            n_len: 20,
            noise_pct: 0.0,
            algorithm: "so".into(),
            seed: i,
            recon_error: rng.random::<f64>().powi(3),
            mean_error_bar: 0.0,
            sparsity_ratio: 1.0,
            model_size: 1,
            log_evidence: 0.0,
            inner_iters: 1,
            outer_iters: 1,
            converged: true,
            wall_time_s: 0.0,
        })
        .collect();
    let mut last = 0.0;
    for i in 1..=100 {
        let r = metrics::acceptance_rate(&records, i as f64 / 100.0).unwrap();
        assert!(r >= last);
        last = r;
    }
    assert_eq!(metrics::acceptance_rate(&records, 1.5).unwrap(), 1.0);
}
