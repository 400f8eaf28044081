//! Seeded trial grids over measurement count, noise level and solver variant.
//!
//! Every cell derives its randomness from `(master_seed, k, trial)` alone, so
//! the output does not depend on the execution order or the thread count.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::Config;
use super::report::{summarize, summary_csv, SummaryRow};
use super::{csv, CliError, CliResult};
use crate::metrics::{self, TrialRecord, DEFAULT_THRESHOLDS, SPARSITY_TAU};
use crate::rng::derive_seed;
use crate::signalgen::{self, Basis, BasisKind, Signal, SparseCoefficients, SpikeKind};
use crate::solvers::{solve, SolverConfig, Variant};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_len: usize,
    pub spike_count: usize,
    pub spike_kind: SpikeKind,
    pub k_values: Vec<usize>,
    pub noise_pcts: Vec<f64>,
    pub algorithms: Vec<Variant>,
    pub trials: usize,
    pub master_seed: u64,
    pub thresholds: Vec<f64>,
    pub basis: BasisKind,
    /// Record wall-clock time per trial. Off by default so that the CSV is
    /// reproducible byte for byte.
    pub timing: bool,
}

pub const SWEEP_KEYS: &[&str] = &[
    "n", "spikes", "spike_kind", "k", "noise", "algorithms", "trials", "seed", "thresholds", "basis",
    "timing",
];

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_len: 512,
            spike_count: 20,
            spike_kind: SpikeKind::Uniform,
            k_values: (40..=120).step_by(10).collect(),
            noise_pcts: vec![1e-5, 0.05],
            algorithms: Variant::ALL.to_vec(),
            trials: 100,
            master_seed: 0,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            basis: BasisKind::Identity,
            timing: false,
        }
    }
}

impl SweepSpec {
    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        cfg.check_keys(SWEEP_KEYS)?;
        let d = Self::default();
        let spec = Self {
            n_len: cfg.get("n")?.unwrap_or(d.n_len),
            spike_count: cfg.get("spikes")?.unwrap_or(d.spike_count),
            spike_kind: cfg.get("spike_kind")?.unwrap_or(d.spike_kind),
            k_values: cfg.get_int_range("k")?.unwrap_or(d.k_values),
            noise_pcts: cfg.get_list("noise")?.unwrap_or(d.noise_pcts),
            algorithms: cfg.get_list("algorithms")?.unwrap_or(d.algorithms),
            trials: cfg.get("trials")?.unwrap_or(d.trials),
            master_seed: cfg.get("seed")?.unwrap_or(d.master_seed),
            thresholds: cfg.get_list("thresholds")?.unwrap_or(d.thresholds),
            basis: cfg.get("basis")?.unwrap_or(d.basis),
            timing: cfg.get("timing")?.unwrap_or(d.timing),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.n_len == 0 || self.spike_count == 0 || self.spike_count > self.n_len {
            return bad(format!("need 0 < spikes <= n, got spikes={} n={}", self.spike_count, self.n_len));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.k_values.is_empty() || self.noise_pcts.is_empty() || self.algorithms.is_empty() {
            return bad("k, noise and algorithms must be non-empty".into());
        }
        if let Some(k) = self.k_values.iter().find(|&&k| k == 0 || k > self.n_len) {
            return bad(format!("k = {k} outside 1..={}", self.n_len));
        }
        if self.noise_pcts.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("noise levels must be finite and non-negative".into());
        }
        if self.thresholds.iter().any(|t| !(*t > 0.0)) {
            return bad("thresholds must be positive".into());
        }
        if self.basis == BasisKind::Haar && !self.n_len.is_power_of_two() {
            return bad(format!("the Haar basis needs a power-of-two length, got {}", self.n_len));
        }
        Ok(())
    }
}

/// One `(algorithm, k, noise, trial)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub algorithm: Variant,
    pub k: usize,
    pub noise: f64,
    pub trial: usize,
}

/// Cells in output order: algorithm name, then k, noise, trial.
pub fn cells(spec: &SweepSpec) -> Vec<Cell> {
    let mut algs = spec.algorithms.clone();
    algs.sort_by_key(|a| a.name());
    algs.dedup();
    let mut ks = spec.k_values.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut noises = spec.noise_pcts.clone();
    noises.sort_by(f64::total_cmp);
    noises.dedup();
    let mut out = Vec::with_capacity(algs.len() * ks.len() * noises.len() * spec.trials);
    for &algorithm in &algs {
        for &k in &ks {
            for &noise in &noises {
                for trial in 0..spec.trials {
                    out.push(Cell { algorithm, k, noise, trial });
                }
            }
        }
    }
    out
}

/// Seed shared by every algorithm and noise level of trial `trial` at `k`;
/// it fixes the projection matrix.
pub fn trial_seed(master: u64, k: usize, trial: usize) -> u64 {
    derive_seed(master, &format!("trial/k={k}"), trial as u64)
}

/// The sweep's ground truth: coefficients and the signal they synthesize.
pub fn ground_truth(spec: &SweepSpec) -> CliResult<(SparseCoefficients, Signal)> {
    let w = signalgen::gen_spikes(
        spec.n_len,
        spec.spike_count,
        spec.spike_kind,
        derive_seed(spec.master_seed, "signal", 0),
    )?;
    let basis = Basis::new(spec.basis, spec.n_len)?;
    let coeffs = SparseCoefficients::new(w.as_slice().to_vec(), spec.basis)?;
    let x = signalgen::basis_inverse(&basis, &coeffs)?;
    Ok((coeffs, x))
}

/// The `(Theta, y)` pair of a cell, as seen by every algorithm.
pub fn cell_problem(
    spec: &SweepSpec,
    x: &Signal,
    k: usize,
    noise: f64,
    trial: usize,
) -> CliResult<(nalgebra::DMatrix<f64>, nalgebra::DVector<f64>, u64)> {
    let ts = trial_seed(spec.master_seed, k, trial);
    let phi = signalgen::gen_projection(k, spec.n_len, derive_seed(ts, "phi", 0))?;
    let y = signalgen::compress(&phi, x, noise, derive_seed(ts, "noise", noise.to_bits()))?;
    let theta = signalgen::design_matrix(&phi, &Basis::new(spec.basis, spec.n_len)?)?;
    Ok((theta, y.values, ts))
}

pub fn run_cell(spec: &SweepSpec, w: &SparseCoefficients, x: &Signal, cell: Cell) -> CliResult<TrialRecord> {
    let (theta, y, ts) = cell_problem(spec, x, cell.k, cell.noise, cell.trial)?;
    let cfg = SolverConfig::new(cell.algorithm)
        .with_seed(derive_seed(ts, cell.algorithm.name(), cell.noise.to_bits()))
        .with_noise_level(cell.noise)
        .with_basis(spec.basis);
    let start = Instant::now();
    let result = solve(&theta, &y, &cfg);
    let wall = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let mut rec = TrialRecord {
        k_meas: cell.k,
        n_len: spec.n_len,
        noise_pct: cell.noise,
        algorithm: cell.algorithm.name().to_string(),
        seed: ts,
        recon_error: f64::NAN,
        mean_error_bar: f64::NAN,
        sparsity_ratio: f64::NAN,
        model_size: 0,
        log_evidence: f64::NAN,
        inner_iters: 0,
        outer_iters: 0,
        converged: false,
        wall_time_s: wall,
    };
    if let Ok(r) = result {
        rec.recon_error = metrics::reconstruction_error(&r.x_hat, x)?;
        rec.mean_error_bar = r.mean_error_bar;
        rec.sparsity_ratio = metrics::sparsity_ratio(&r.w_hat, w, SPARSITY_TAU).unwrap_or(f64::NAN);
        rec.model_size = r.model_size();
        rec.log_evidence = r.final_log_evidence;
        rec.inner_iters = r.inner_iters;
        rec.outer_iters = r.outer_iters;
        rec.converged = r.converged;
    }
    Ok(rec)
}

/// Run every cell, in parallel on `threads` workers (all cores when `None`),
/// and return the records in output order.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> CliResult<Vec<TrialRecord>> {
    spec.validate()?;
    let (w, x) = ground_truth(spec)?;
    let cells = cells(spec);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| cells.par_iter().map(|&c| run_cell(spec, &w, &x, c)).collect())
}

/// Path of the summary written next to a sweep CSV.
pub fn summary_path(out: &Path) -> std::path::PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_summary.csv"))
}

/// Run the sweep and write the trial CSV and its summary.
pub fn run_sweep_to(spec: &SweepSpec, out: &Path, threads: Option<usize>) -> CliResult<Vec<SummaryRow>> {
    let records = run_sweep(spec, threads)?;
    csv::write(out, &records)?;
    let summary = summarize(&records, &spec.thresholds)?;
    let path = summary_path(out);
    std::fs::write(&path, summary_csv(&summary, &spec.thresholds)).map_err(super::io_err(&path))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepSpec {
        SweepSpec {
            n_len: 32,
            spike_count: 3,
            k_values: vec![16, 12],
            noise_pcts: vec![0.0],
            algorithms: vec![Variant::So, Variant::BottomUpFixed],
            trials: 2,
            ..SweepSpec::default()
        }
    }

    #[test]
    fn row_count_and_order() {
        let spec = small();
        let recs = run_sweep(&spec, Some(1)).unwrap();
        assert_eq!(recs.len(), 2 * 2 * 2);
        let keys: Vec<(String, usize)> = recs.iter().map(|r| (r.algorithm.clone(), r.k_meas)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(recs[0].algorithm, "bottom_up_fixed");
    }

    #[test]
    fn identical_problem_across_algorithms() {
        let spec = small();
        let recs = run_sweep(&spec, Some(2)).unwrap();
        let seeds_a: Vec<u64> = recs.iter().filter(|r| r.algorithm == "so").map(|r| r.seed).collect();
        let seeds_b: Vec<u64> =
            recs.iter().filter(|r| r.algorithm == "bottom_up_fixed").map(|r| r.seed).collect();
        assert_eq!(seeds_a, seeds_b);
    }

    #[test]
    fn validation() {
        let mut s = small();
        s.k_values = vec![40];
        assert!(s.validate().is_err());
        let mut s = small();
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = small();
        s.n_len = 48;
        s.basis = BasisKind::Haar;
        assert!(s.validate().is_err());
    }

    #[test]
    fn summary_path_sits_next_to_output() {
        assert_eq!(summary_path(Path::new("/tmp/a/run.csv")), Path::new("/tmp/a/run_summary.csv"));
    }
}
