//! Reconstruction quality measures.

use nalgebra::DMatrix;

use crate::error::{invalid, BcsError, Result};
use crate::signalgen::{Basis, BasisKind, Signal, SparseCoefficients};

/// Default magnitude below which a coefficient counts as zero.
pub const SPARSITY_TAU: f64 = 1e-4;

/// Default acceptance thresholds on the reconstruction error.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.01, 0.1, 0.5];

/// `||x_hat - x||^2 / ||x||^2`.
pub fn reconstruction_error(x_hat: &Signal, x: &Signal) -> Result<f64> {
    if x_hat.len() != x.len() {
        return Err(invalid(format!(
            "signals differ in length ({} vs {})",
            x_hat.len(),
            x.len()
        )));
    }
    let den = x.values().norm_squared();
    if !(den > 0.0) {
        return Err(invalid("reference signal is zero"));
    }
    Ok((x_hat.values() - x.values()).norm_squared() / den)
}

/// How [`error_bars`] averages the per-sample bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorBarMean {
    /// Over samples whose bar is nonzero (the active terms for an identity basis).
    NonzeroTerms,
    AllSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBars {
    pub bars: Vec<f64>,
    pub mean: f64,
}

/// `sqrt(diag(Psi Sigma Psi^T))` with `Sigma` embedded at `active`.
pub fn error_bars(
    sigma_mat: &DMatrix<f64>,
    psi: &Basis,
    active: &[usize],
    mean: ErrorBarMean,
) -> Result<ErrorBars> {
    let n = psi.dim();
    let m = active.len();
    if sigma_mat.nrows() != m || sigma_mat.ncols() != m {
        return Err(invalid(format!(
            "covariance is {}x{} for {m} active terms",
            sigma_mat.nrows(),
            sigma_mat.ncols()
        )));
    }
    if let Some(&a) = active.iter().find(|&&a| a >= n) {
        return Err(invalid(format!("active index {a} out of range for dimension {n}")));
    }
    if (0..m).any(|i| !(sigma_mat[(i, i)] >= 0.0)) {
        return Err(BcsError::IllConditioned {
            active: active.to_vec(),
        });
    }
    let mut var = vec![0.0; n];
    match psi.kind() {
        BasisKind::Identity => {
            for (i, &a) in active.iter().enumerate() {
                var[a] = sigma_mat[(i, i)];
            }
        }
        BasisKind::Haar => {
            // U has the synthesized unit vectors of the active terms as columns.
            let mut u = DMatrix::zeros(n, m);
            let mut unit = vec![0.0; n];
            for (i, &a) in active.iter().enumerate() {
                unit[a] = 1.0;
                let col = psi.synthesize(&unit)?;
                unit[a] = 0.0;
                u.column_mut(i).copy_from_slice(&col);
            }
            let us = &u * sigma_mat;
            for (s, v) in var.iter_mut().enumerate() {
                *v = us.row(s).dot(&u.row(s)).max(0.0);
            }
        }
    }
    let bars: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    let picked: Vec<f64> = match mean {
        ErrorBarMean::AllSamples => bars.clone(),
        ErrorBarMean::NonzeroTerms => bars.iter().copied().filter(|b| *b > 0.0).collect(),
    };
    let mean = if picked.is_empty() {
        0.0
    } else {
        picked.iter().sum::<f64>() / picked.len() as f64
    };
    Ok(ErrorBars { bars, mean })
}

/// Number of coefficients with magnitude below `tau`.
pub fn count_below(w: &SparseCoefficients, tau: f64) -> usize {
    w.values.iter().filter(|v| v.abs() < tau).count()
}

/// Ratio of near-zero counts, reconstructed over reference.
pub fn sparsity_ratio(w_hat: &SparseCoefficients, w_ref: &SparseCoefficients, tau: f64) -> Result<f64> {
    if w_hat.len() != w_ref.len() {
        return Err(invalid("coefficient vectors differ in length"));
    }
    if !(tau > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let s_ref = count_below(w_ref, tau);
    if s_ref == 0 {
        return Err(invalid("reference has no coefficients below the threshold"));
    }
    Ok(count_below(w_hat, tau) as f64 / s_ref as f64)
}

/// One row of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub k_meas: usize,
    pub n_len: usize,
    pub noise_pct: f64,
    /// Variant name, optionally prefixed with an experiment case (`case1:so`).
    pub algorithm: String,
    pub seed: u64,
    pub recon_error: f64,
    pub mean_error_bar: f64,
    pub sparsity_ratio: f64,
    pub model_size: usize,
    pub log_evidence: f64,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

/// Fraction of records whose reconstruction error is below `threshold`.
pub fn acceptance_rate(records: &[TrialRecord], threshold: f64) -> Result<f64> {
    if records.is_empty() {
        return Err(invalid("no records"));
    }
    if !(threshold > 0.0) {
        return Err(invalid("threshold must be positive"));
    }
    let hits = records.iter().filter(|r| r.recon_error < threshold).count();
    Ok(hits as f64 / records.len() as f64)
}
