//! Slow reference implementations for validating the fast paths at small
//! scale. Nothing here is used by the solvers.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{invalid, BcsError, Result};
use crate::posterior::{FactorPair, HyperState};

pub const MAX_ORACLE_COLUMNS: usize = 20;
pub const MAX_ORACLE_SUPPORT: usize = 3;
pub const MAX_DENSE_ROWS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub support: Vec<usize>,
    pub coeffs: DVector<f64>,
    pub residual_norm2: f64,
}

/// Least squares on the columns in `support`; `None` when the normal matrix
/// is not positive definite.
pub fn least_squares(theta: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> Option<(DVector<f64>, f64)> {
    if support.is_empty() {
        return Some((DVector::zeros(0), y.norm_squared()));
    }
    let sub = theta.select_columns(support.iter());
    let chol = Cholesky::new(sub.tr_mul(&sub))?;
    let c = chol.solve(&sub.tr_mul(y));
    let r = (y - &sub * &c).norm_squared();
    Some((c, r))
}

fn combinations(n: usize, size: usize, out: &mut Vec<Vec<usize>>) {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut Vec::new(), out);
}

/// Every support of size `0..=max_support` in size-then-lexicographic order.
pub fn all_supports(n: usize, max_support: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 0..=max_support.min(n) {
        combinations(n, s, &mut out);
    }
    out
}

/// Minimum-residual least-squares fit over all supports of size at most
/// `max_support`. A later support replaces the incumbent only if its residual
/// is smaller by more than a rounding margin, so ties favour smaller and then
/// lexicographically earlier supports.
pub fn exhaustive_recover(theta: &DMatrix<f64>, y: &DVector<f64>, max_support: usize) -> Result<OracleSolution> {
    if theta.nrows() != y.len() {
        return Err(invalid("design matrix rows do not match measurements"));
    }
    if theta.ncols() > MAX_ORACLE_COLUMNS || max_support > MAX_ORACLE_SUPPORT {
        return Err(invalid(format!(
            "exhaustive search limited to N <= {MAX_ORACLE_COLUMNS} and support <= {MAX_ORACLE_SUPPORT}"
        )));
    }
    let margin = 1e-12 * y.norm_squared().max(f64::MIN_POSITIVE);
    let mut best = OracleSolution {
        support: Vec::new(),
        coeffs: DVector::zeros(0),
        residual_norm2: y.norm_squared(),
    };
    for support in all_supports(theta.ncols(), max_support).into_iter().skip(1) {
        if let Some((c, r)) = least_squares(theta, y, &support) {
            if r < best.residual_norm2 - margin {
                best = OracleSolution {
                    support,
                    coeffs: c,
                    residual_norm2: r,
                };
            }
        }
    }
    Ok(best)
}

/// `C = sigma2 I + Theta_a A^-1 Theta_a^T`, built entry by entry.
pub fn dense_c(theta: &DMatrix<f64>, state: &HyperState) -> DMatrix<f64> {
    let k = theta.nrows();
    DMatrix::from_fn(k, k, |i, j| {
        let mut v = if i == j { state.sigma2 } else { 0.0 };
        for (&m, &a) in state.active.iter().zip(&state.alpha) {
            v += theta[(i, m)] * theta[(j, m)] / a;
        }
        v
    })
}

fn check_dense(theta: &DMatrix<f64>, y: &DVector<f64>, state: &HyperState) -> Result<()> {
    if theta.nrows() != y.len() {
        return Err(invalid("design matrix rows do not match measurements"));
    }
    if y.len() > MAX_DENSE_ROWS {
        return Err(invalid(format!("dense reference limited to K <= {MAX_DENSE_ROWS}")));
    }
    state.validate(theta.ncols())
}

fn gaussian_log_density(c: DMatrix<f64>, y: &DVector<f64>, active: &[usize]) -> Result<f64> {
    let k = y.len() as f64;
    let chol = Cholesky::new(c).ok_or_else(|| BcsError::IllConditioned {
        active: active.to_vec(),
    })?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let quad = y.dot(&chol.solve(y));
    Ok(-0.5 * (k * (2.0 * PI).ln() + log_det + quad))
}

/// `log N(y; 0, C)` with `C` formed and factorized explicitly.
pub fn dense_log_evidence(theta: &DMatrix<f64>, y: &DVector<f64>, state: &HyperState) -> Result<f64> {
    check_dense(theta, y, state)?;
    gaussian_log_density(dense_c(theta, state), y, &state.active)
}

/// `S_n`, `Q_n` from an explicit inverse of `C` with term `n` removed.
pub fn dense_factors(theta: &DMatrix<f64>, y: &DVector<f64>, state: &HyperState, n: usize) -> Result<FactorPair> {
    check_dense(theta, y, state)?;
    let mut without = state.clone();
    if let Some(i) = without.slot(n) {
        without.active.remove(i);
        without.alpha.remove(i);
    }
    let c_inv = dense_c(theta, &without)
        .try_inverse()
        .ok_or_else(|| BcsError::IllConditioned {
            active: without.active.clone(),
        })?;
    let col = theta.column(n).clone_owned();
    let ci = &c_inv * &col;
    Ok(FactorPair {
        s_factor: col.dot(&ci),
        q_factor: ci.dot(y),
    })
}

/// Dense `C^-1`.
pub fn dense_c_inverse(theta: &DMatrix<f64>, state: &HyperState) -> Result<DMatrix<f64>> {
    dense_c(theta, state).try_inverse().ok_or_else(|| BcsError::IllConditioned {
        active: state.active.clone(),
    })
}

/// Central difference `(f(x0 + h) - f(x0 - h)) / 2h`.
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, x0: f64, h: f64) -> f64 {
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}
