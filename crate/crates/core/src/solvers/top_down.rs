use nalgebra::{Cholesky, DMatrix, DVector};

use super::{
    check_inputs, data_scale, empty_result, finish, sigma2_from_parts, RunLog, Sigma2Init,
    SolverConfig, TraceEvent, Variant, SIGMA2_FLOOR_REL,
};
use crate::error::{invalid, BcsError, Result};
use crate::posterior::{self, active_columns, HyperState};

/// Knobs of the fixed-point sweep, shared with the overflow recovery of the
/// stochastic solver.
pub(crate) struct SweepOptions {
    pub update_sigma2: bool,
    pub tol: f64,
    pub cap: f64,
    pub max_iters: usize,
    pub sigma2_floor: f64,
    pub record_trace: bool,
}

/// `mu` and `diag(Sigma)` at `state`. Factorizes the K x K marginal
/// covariance when the model has more terms than measurements.
fn mean_and_diag(
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<(DVector<f64>, Vec<f64>)> {
    let k = theta_active.nrows();
    let m = theta_active.ncols();
    if m <= k {
        let post = posterior::posterior_moments_direct(theta_active, y, state)?;
        let diag = (0..m).map(|i| post.sigma[(i, i)]).collect();
        return Ok((post.mu, diag));
    }
    // U = Theta A^{-1/2};  C = sigma2 I + U U^T
    let mut u = theta_active.clone();
    for (j, a) in state.alpha.iter().enumerate() {
        u.column_mut(j).scale_mut(1.0 / a.sqrt());
    }
    let mut c = &u * u.transpose();
    for i in 0..k {
        c[(i, i)] += state.sigma2;
    }
    let chol = Cholesky::new(c).ok_or_else(|| BcsError::IllConditioned {
        active: state.active.clone(),
    })?;
    let mut v = u.clone();
    chol.l().solve_lower_triangular_mut(&mut v);
    let z = chol.solve(y);
    let proj = u.tr_mul(&z);
    let mut mu = DVector::zeros(m);
    let mut diag = Vec::with_capacity(m);
    for (j, a) in state.alpha.iter().enumerate() {
        let s = a.sqrt();
        mu[j] = proj[j] / s;
        diag.push((1.0 - v.column(j).norm_squared()) / a);
    }
    Ok((mu, diag))
}

/// Repeated `alpha_n <- gamma_n / mu_n^2` sweeps with pruning. Returns the
/// final state and whether the precisions settled.
pub(crate) fn sweep(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    mut state: HyperState,
    opts: &SweepOptions,
    log: &mut RunLog,
) -> Result<(HyperState, bool)> {
    let k = y.len();
    for _ in 0..opts.max_iters {
        if state.is_empty() {
            return Ok((state, true));
        }
        log.inner_iters += 1;
        let ta = active_columns(theta, &state.active);
        let (mu, diag) = mean_and_diag(&ta, y, &state)?;
        let mut gamma_sum = 0.0;
        let mut next_active = Vec::with_capacity(state.len());
        let mut next_alpha = Vec::with_capacity(state.len());
        let mut max_change: f64 = 0.0;
        let mut pruned = false;
        for (i, (&n, &a)) in state.active.iter().zip(&state.alpha).enumerate() {
            let g = 1.0 - a * diag[i];
            gamma_sum += g;
            let new = g / (mu[i] * mu[i]);
            if new.is_finite() && new > 0.0 && new <= opts.cap {
                max_change = max_change.max((new.ln() - a.ln()).abs());
                next_active.push(n);
                next_alpha.push(new);
            } else {
                pruned = true;
            }
        }
        let mut sigma2 = state.sigma2;
        if opts.update_sigma2 {
            let resid2 = (y - &ta * &mu).norm_squared();
            match sigma2_from_parts(resid2, gamma_sum, k, state.a_param, state.b_param) {
                Ok(v) => sigma2 = v.max(opts.sigma2_floor),
                Err(_) => log.push(true, f64::NAN, state.len(), sigma2, TraceEvent::DegenerateSigma2),
            }
        }
        let sigma_change = (sigma2.ln() - state.sigma2.ln()).abs();
        state.active = next_active;
        state.alpha = next_alpha;
        state.sigma2 = sigma2;
        if opts.record_trace {
            let l = posterior::log_evidence(theta, y, &state, false).unwrap_or(f64::NAN);
            log.push(true, l, state.len(), sigma2, TraceEvent::Step);
        }
        if !pruned && max_change < opts.tol && sigma_change < opts.tol {
            return Ok((state, true));
        }
    }
    Ok((state, false))
}

/// Top-down reconstruction: every term with a nonzero column starts active
/// at `alpha_n = N ||Theta_n||^2 / (K var(y))` and `sigma2 = 0.1 var(y)`.
pub fn solve_top_down(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<super::ReconstructionResult> {
    check_inputs(theta, y, cfg)?;
    if cfg.variant != Variant::TopDown {
        return Err(invalid(format!("top-down solver called with variant {}", cfg.variant)));
    }
    if y.iter().all(|v| *v == 0.0) {
        return empty_result(theta, cfg);
    }
    let (k, n) = theta.shape();
    let var_y = data_scale(y);
    let sigma2 = match cfg.sigma2_init {
        Sigma2Init::Fixed(v) => v,
        Sigma2Init::FromState => cfg.fixed_sigma2_frac * var_y,
    };
    let mut active = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    for (j, col) in theta.column_iter().enumerate() {
        let norm2 = col.norm_squared();
        if norm2 > 0.0 {
            active.push(j);
            alpha.push(n as f64 * norm2 / (k as f64 * var_y));
        }
    }
    let state = HyperState::new(active, alpha, sigma2)?;
    let opts = SweepOptions {
        update_sigma2: true,
        tol: cfg.inner_tol,
        cap: cfg.alpha_prune_cap,
        max_iters: cfg.inner_cap(n),
        sigma2_floor: SIGMA2_FLOOR_REL * var_y,
        record_trace: cfg.record_trace,
    };
    let mut log = RunLog::default();
    let state = match sweep(theta, y, state.clone(), &opts, &mut log) {
        Ok((s, conv)) => {
            log.converged = conv;
            s
        }
        Err(e) => {
            log.abort(&e);
            state
        }
    };
    log.outer_iters = 1;
    finish(theta, y, state, cfg, log)
}
