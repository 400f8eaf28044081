//! Per-cell summaries of trial records.

use std::fmt::Write as _;
use std::path::Path;

use super::{csv, CliResult};
use crate::metrics::{acceptance_rate, TrialRecord, DEFAULT_THRESHOLDS};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub k: usize,
    pub n: usize,
    pub noise_pct: f64,
    pub trials: usize,
    /// One rate per threshold, in the order given to [`summarize`].
    pub acceptance: Vec<f64>,
    pub mean_recon_error: f64,
    pub mean_error_bar: f64,
    pub mean_sparsity_ratio: f64,
    pub mean_wall_time_s: f64,
    pub converged: usize,
}

/// Mean of the finite entries, NaN if there are none.
fn finite_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.filter(|v| v.is_finite()) {
        sum += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Group records by `(algorithm, k, noise)` in sorted order.
pub fn summarize(records: &[TrialRecord], thresholds: &[f64]) -> CliResult<Vec<SummaryRow>> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.algorithm
            .cmp(&b.algorithm)
            .then(a.k_meas.cmp(&b.k_meas))
            .then(a.noise_pct.total_cmp(&b.noise_pct))
    });
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let head = sorted[i];
        let mut j = i;
        while j < sorted.len()
            && sorted[j].algorithm == head.algorithm
            && sorted[j].k_meas == head.k_meas
            && sorted[j].noise_pct.to_bits() == head.noise_pct.to_bits()
        {
            j += 1;
        }
        let group: Vec<TrialRecord> = sorted[i..j].iter().map(|r| (*r).clone()).collect();
        let acceptance = thresholds
            .iter()
            .map(|&t| acceptance_rate(&group, t))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(SummaryRow {
            algorithm: head.algorithm.clone(),
            k: head.k_meas,
            n: head.n_len,
            noise_pct: head.noise_pct,
            trials: group.len(),
            acceptance,
            mean_recon_error: finite_mean(group.iter().map(|r| r.recon_error)),
            mean_error_bar: finite_mean(group.iter().map(|r| r.mean_error_bar)),
            mean_sparsity_ratio: finite_mean(group.iter().map(|r| r.sparsity_ratio)),
            mean_wall_time_s: finite_mean(group.iter().map(|r| r.wall_time_s)),
            converged: group.iter().filter(|r| r.converged).count(),
        });
        i = j;
    }
    Ok(out)
}

pub fn summary_csv(rows: &[SummaryRow], thresholds: &[f64]) -> String {
    let mut s = String::from("algorithm,k,n,noise_pct,trials");
    for t in thresholds {
        let _ = write!(s, ",rate_below_{t}");
    }
    s.push_str(",mean_recon_error,mean_error_bar,mean_sparsity_ratio,mean_wall_time_s,converged\n");
    for r in rows {
        let _ = write!(s, "{},{},{},{},{}", r.algorithm, r.k, r.n, r.noise_pct, r.trials);
        for a in &r.acceptance {
            let _ = write!(s, ",{a}");
        }
        let _ = writeln!(
            s,
            ",{},{},{},{},{}",
            r.mean_recon_error, r.mean_error_bar, r.mean_sparsity_ratio, r.mean_wall_time_s, r.converged
        );
    }
    s
}

/// Fixed-width text table.
pub fn render_table(rows: &[SummaryRow], thresholds: &[f64]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<22} {:>5} {:>5} {:>9} {:>6}", "algorithm", "k", "n", "noise", "trials");
    for t in thresholds {
        let _ = write!(s, " {:>9}", format!("RE<{t}"));
    }
    let _ = writeln!(s, " {:>10} {:>10} {:>8} {:>9} {:>5}", "mean_RE", "mean_bar", "mean_SR", "wall_s", "conv");
    for r in rows {
        let _ = write!(s, "{:<22} {:>5} {:>5} {:>9.3e} {:>6}", r.algorithm, r.k, r.n, r.noise_pct, r.trials);
        for a in &r.acceptance {
            let _ = write!(s, " {:>9.3}", a);
        }
        let _ = writeln!(
            s,
            " {:>10.3e} {:>10.3e} {:>8.3} {:>9.4} {:>5}",
            r.mean_recon_error, r.mean_error_bar, r.mean_sparsity_ratio, r.mean_wall_time_s, r.converged
        );
    }
    s
}

/// Summary table of a trial CSV at the default thresholds.
pub fn report(path: &Path) -> CliResult<String> {
    let records = csv::read(path)?;
    let rows = summarize(&records, &DEFAULT_THRESHOLDS)?;
    Ok(render_table(&rows, &DEFAULT_THRESHOLDS))
}
