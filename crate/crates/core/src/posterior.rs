//! Gaussian linear-model algebra for sparse Bayesian learning.
//!
//! Model: `y = Theta w + e`, `e ~ N(0, sigma2 I)`, `w_n ~ N(0, 1/alpha_n)`.
//! Terms outside the active set have `alpha_n = inf` and drop out entirely; that
//! status is carried by [`Precision::Inactive`] and never by a float infinity.
//!
//! All functions here are pure. The solvers keep an incremental copy of the
//! same quantities (see `solvers::engine`); the tests pin the two together.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, BcsError, Result};

/// Relative size of `alpha_n - S~_n` below which an active term is declared
/// degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Prior precision of one basis term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    Finite(f64),
    /// `alpha = inf`: the term is pruned from the model.
    Inactive,
}

impl Precision {
    pub fn is_active(self) -> bool {
        matches!(self, Precision::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Precision::Finite(a) => Some(a),
            Precision::Inactive => None,
        }
    }
}

/// Hyperparameters of the model: active set, precisions, noise variance and the
/// Gamma(a, b) prior on the noise precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperState {
    /// Column indices of the active terms, in posterior order.
    pub active: Vec<usize>,
    /// Precision of each active term, parallel to `active`.
    pub alpha: Vec<f64>,
    pub sigma2: f64,
    pub a_param: f64,
    pub b_param: f64,
}

impl HyperState {
    pub fn empty(sigma2: f64) -> Self {
        Self {
            active: Vec::new(),
            alpha: Vec::new(),
            sigma2,
            a_param: 1.0,
            b_param: 0.0,
        }
    }

    pub fn new(active: Vec<usize>, alpha: Vec<f64>, sigma2: f64) -> Result<Self> {
        let state = Self {
            active,
            alpha,
            sigma2,
            a_param: 1.0,
            b_param: 0.0,
        };
        state.check_shape()?;
        Ok(state)
    }

    fn check_shape(&self) -> Result<()> {
        if self.active.len() != self.alpha.len() {
            return Err(invalid("active set and precision vector differ in length"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(invalid(format!("noise variance {} must be positive", self.sigma2)));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(invalid(format!("precision {a} must be finite and positive")));
        }
        if !(self.a_param > 0.0) || !(self.b_param >= 0.0) {
            return Err(invalid("gamma prior needs a > 0 and b >= 0"));
        }
        let mut seen = self.active.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("active set contains duplicates"));
        }
        Ok(())
    }

    /// Full validation against a design matrix with `n_cols` columns.
    pub fn validate(&self, n_cols: usize) -> Result<()> {
        self.check_shape()?;
        if let Some(&n) = self.active.iter().find(|&&n| n >= n_cols) {
            return Err(invalid(format!("active index {n} out of range for {n_cols} columns")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn slot(&self, n: usize) -> Option<usize> {
        self.active.iter().position(|&m| m == n)
    }

    pub fn precision(&self, n: usize) -> Precision {
        match self.slot(n) {
            Some(i) => Precision::Finite(self.alpha[i]),
            None => Precision::Inactive,
        }
    }

    /// Set term `n` to `p`, appending newly activated terms at the end.
    pub fn set_precision(&mut self, n: usize, p: Precision) {
        match (self.slot(n), p) {
            (Some(i), Precision::Finite(a)) => self.alpha[i] = a,
            (Some(i), Precision::Inactive) => {
                self.active.remove(i);
                self.alpha.remove(i);
            }
            (None, Precision::Finite(a)) => {
                self.active.push(n);
                self.alpha.push(a);
            }
            (None, Precision::Inactive) => {}
        }
    }
}

/// Posterior `N(mu, sigma)` over the active coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGaussian {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl PosteriorGaussian {
    pub fn empty() -> Self {
        Self {
            mu: DVector::zeros(0),
            sigma: DMatrix::zeros(0, 0),
        }
    }
}

/// Leave-one-out sparsity factor `S_n` and quality factor `Q_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorPair {
    pub s_factor: f64,
    pub q_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidenceBreakdown {
    pub log_evidence: f64,
    /// Posterior expectation of the log-likelihood.
    pub data_fit: f64,
    /// KL divergence from prior to posterior.
    pub kl_info: f64,
}

/// Columns of `theta` listed in `active`, in that order.
pub fn active_columns(theta: &DMatrix<f64>, active: &[usize]) -> DMatrix<f64> {
    theta.select_columns(active.iter())
}

fn check_dims(theta: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if theta.nrows() != y.len() {
        return Err(invalid(format!(
            "design matrix has {} rows but there are {} measurements",
            theta.nrows(),
            y.len()
        )));
    }
    Ok(())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn ill(state: &HyperState) -> BcsError {
    BcsError::IllConditioned {
        active: state.active.clone(),
    }
}

/// Cholesky factor of `sigma^-2 Theta_a^T Theta_a + A`.
fn precision_cholesky(
    theta_active: &DMatrix<f64>,
    state: &HyperState,
) -> Result<Cholesky<f64, Dyn>> {
    let beta = 1.0 / state.sigma2;
    let mut prec = theta_active.tr_mul(theta_active) * beta;
    for (i, a) in state.alpha.iter().enumerate() {
        prec[(i, i)] += a;
    }
    Cholesky::new(prec).ok_or_else(|| ill(state))
}

/// Cholesky factor of `C = sigma2 I + Theta_a A^-1 Theta_a^T`.
fn marginal_cholesky(
    theta_active: &DMatrix<f64>,
    state: &HyperState,
) -> Result<Cholesky<f64, Dyn>> {
    let k = theta_active.nrows();
    let mut scaled = theta_active.clone();
    for (j, a) in state.alpha.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / a.sqrt());
    }
    let mut c = &scaled * scaled.transpose();
    for i in 0..k {
        c[(i, i)] += state.sigma2;
    }
    Cholesky::new(c).ok_or_else(|| ill(state))
}

fn check_posterior_inputs(
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<()> {
    check_dims(theta_active, y)?;
    state.check_shape()?;
    if theta_active.ncols() != state.len() {
        return Err(invalid(format!(
            "{} active columns supplied for {} precisions",
            theta_active.ncols(),
            state.len()
        )));
    }
    Ok(())
}

/// `Sigma = (sigma^-2 Theta^T Theta + A)^-1`, `mu = sigma^-2 Sigma Theta^T y`
/// through an N' x N' Cholesky factorization.
pub fn posterior_moments_direct(
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<PosteriorGaussian> {
    check_posterior_inputs(theta_active, y, state)?;
    if state.is_empty() {
        return Ok(PosteriorGaussian::empty());
    }
    let chol = precision_cholesky(theta_active, state)?;
    let rhs = theta_active.tr_mul(y) / state.sigma2;
    let mu = chol.solve(&rhs);
    let mut sigma = chol.inverse();
    symmetrize(&mut sigma);
    Ok(PosteriorGaussian { mu, sigma })
}

/// The same moments through the Woodbury form
/// `Sigma = A^-1 - A^-1 Theta^T C^-1 Theta A^-1`, which only factorizes the
/// K x K marginal covariance `C`.
pub fn posterior_moments_woodbury(
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<PosteriorGaussian> {
    check_posterior_inputs(theta_active, y, state)?;
    if state.is_empty() {
        return Ok(PosteriorGaussian::empty());
    }
    let chol = marginal_cholesky(theta_active, state)?;
    let inv_alpha = DVector::from_iterator(state.len(), state.alpha.iter().map(|a| 1.0 / a));
    // G = C^-1 Theta A^-1
    let mut scaled = theta_active.clone();
    for (j, ia) in inv_alpha.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*ia);
    }
    let g = chol.solve(&scaled);
    let mut sigma = -(scaled.tr_mul(&g));
    for (i, ia) in inv_alpha.iter().enumerate() {
        sigma[(i, i)] += ia;
    }
    symmetrize(&mut sigma);
    // mu = A^-1 Theta^T C^-1 y
    let z = chol.solve(y);
    let mu = scaled.tr_mul(&z);
    Ok(PosteriorGaussian { mu, sigma })
}

/// Posterior moments, choosing the Woodbury path when `N' > K`.
pub fn posterior_moments(
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<PosteriorGaussian> {
    if theta_active.ncols() > theta_active.nrows() {
        posterior_moments_woodbury(theta_active, y, state)
    } else {
        posterior_moments_direct(theta_active, y, state)
    }
}

/// `C^-1 = sigma^-2 I - sigma^-4 Theta Sigma Theta^T`.
pub fn c_inverse_woodbury(
    theta_active: &DMatrix<f64>,
    state: &HyperState,
    post: &PosteriorGaussian,
) -> DMatrix<f64> {
    let k = theta_active.nrows();
    let beta = 1.0 / state.sigma2;
    let ts = theta_active * &post.sigma;
    let mut c_inv = -(ts * theta_active.transpose()) * (beta * beta);
    for i in 0..k {
        c_inv[(i, i)] += beta;
    }
    c_inv
}

/// log-density of the Gamma(a, b) prior on `sigma^-2`, evaluated at the
/// state's noise variance. With `b = 0` the prior is improper and the
/// normalizer `a log b - log Gamma(a)` is omitted.
pub fn gamma_prior_log_density(state: &HyperState) -> f64 {
    let (a, b) = (state.a_param, state.b_param);
    let beta = 1.0 / state.sigma2;
    let mut v = (a - 1.0) * beta.ln() - b * beta;
    if b > 0.0 {
        v += a * b.ln() - libm::lgamma(a);
    }
    v
}

/// Quantities shared by the evidence evaluations.
struct EvidenceParts {
    k: usize,
    log_det_sigma: f64,
    resid2: f64,
    mu_a_mu: f64,
    post: PosteriorGaussian,
}

fn evidence_parts(theta: &DMatrix<f64>, y: &DVector<f64>, state: &HyperState) -> Result<EvidenceParts> {
    check_dims(theta, y)?;
    state.validate(theta.ncols())?;
    let k = y.len();
    if state.is_empty() {
        return Ok(EvidenceParts {
            k,
            log_det_sigma: 0.0,
            resid2: y.norm_squared(),
            mu_a_mu: 0.0,
            post: PosteriorGaussian::empty(),
        });
    }
    let ta = active_columns(theta, &state.active);
    let (post, log_det_sigma) = if ta.ncols() > k {
        let post = posterior_moments_woodbury(&ta, y, state)?;
        // |Sigma| from |C| = sigma^2K |A|^-1 |Sigma|^-1
        let chol = marginal_cholesky(&ta, state)?;
        let log_det_c = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let log_det_a: f64 = state.alpha.iter().map(|a| a.ln()).sum();
        (post, k as f64 * state.sigma2.ln() - log_det_a - log_det_c)
    } else {
        let chol = precision_cholesky(&ta, state)?;
        let log_det_prec = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let rhs = ta.tr_mul(y) / state.sigma2;
        let mu = chol.solve(&rhs);
        let mut sigma = chol.inverse();
        symmetrize(&mut sigma);
        (PosteriorGaussian { mu, sigma }, -log_det_prec)
    };
    let resid2 = (y - &ta * &post.mu).norm_squared();
    let mu_a_mu = post
        .mu
        .iter()
        .zip(&state.alpha)
        .map(|(m, a)| a * m * m)
        .sum();
    Ok(EvidenceParts {
        k,
        log_det_sigma,
        resid2,
        mu_a_mu,
        post,
    })
}

/// Log evidence `-1/2 [K log 2pi + log|C| + y^T C^-1 y]`, using
/// `log|C| = K log sigma2 - log|A| - log|Sigma|` and
/// `y^T C^-1 y = sigma^-2 ||y - Theta mu||^2 + mu^T A mu`.
///
/// With `with_prior` the Gamma-prior terms on the noise precision are added.
pub fn log_evidence(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
    with_prior: bool,
) -> Result<f64> {
    let p = evidence_parts(theta, y, state)?;
    let log_det_a: f64 = state.alpha.iter().map(|a| a.ln()).sum();
    let log_det_c = p.k as f64 * state.sigma2.ln() - log_det_a - p.log_det_sigma;
    let quad = p.resid2 / state.sigma2 + p.mu_a_mu;
    let mut l = -0.5 * (p.k as f64 * (2.0 * PI).ln() + log_det_c + quad);
    if with_prior {
        l += gamma_prior_log_density(state);
    }
    Ok(l)
}

/// Full-`C` quadratic forms `S~_n = Theta_n^T C^-1 Theta_n` and
/// `Q~_n = Theta_n^T C^-1 y` for every column, with `C^-1` applied through
/// the posterior covariance.
pub fn full_c_factors(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
    post: &PosteriorGaussian,
) -> (Vec<f64>, Vec<f64>) {
    let beta = 1.0 / state.sigma2;
    let n = theta.ncols();
    let tty = theta.tr_mul(y);
    let norms: Vec<f64> = theta.column_iter().map(|c| c.norm_squared()).collect();
    if state.is_empty() {
        let s = norms.iter().map(|v| beta * v).collect();
        let q = tty.iter().map(|v| beta * v).collect();
        return (s, q);
    }
    let ta = active_columns(theta, &state.active);
    let cross = ta.tr_mul(theta); // N' x N
    let sc = &post.sigma * &cross;
    let mut s = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for j in 0..n {
        let quad = cross.column(j).dot(&sc.column(j));
        s.push(beta * norms[j] - beta * beta * quad);
        q.push(beta * (tty[j] - cross.column(j).dot(&post.mu)));
    }
    (s, q)
}

/// Leave-one-out factors of term `n`. Inactive terms use the full-`C` values
/// directly; active terms are converted with
/// `S = alpha S~ / (alpha - S~)`, `Q = alpha Q~ / (alpha - S~)`.
pub fn factors(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
    n: usize,
) -> Result<FactorPair> {
    check_dims(theta, y)?;
    state.validate(theta.ncols())?;
    if n >= theta.ncols() {
        return Err(invalid(format!("term index {n} out of range")));
    }
    let ta = active_columns(theta, &state.active);
    let post = posterior_moments(&ta, y, state)?;
    let beta = 1.0 / state.sigma2;
    let col = theta.column(n);
    let (s_full, q_full) = if state.is_empty() {
        (beta * col.norm_squared(), beta * col.dot(y))
    } else {
        let b = ta.tr_mul(&col);
        let quad = b.dot(&(&post.sigma * &b));
        (
            beta * col.norm_squared() - beta * beta * quad,
            beta * (col.dot(y) - b.dot(&post.mu)),
        )
    };
    match state.precision(n) {
        Precision::Inactive => Ok(FactorPair {
            s_factor: s_full,
            q_factor: q_full,
        }),
        Precision::Finite(alpha) => leave_one_out(n, alpha, s_full, q_full),
    }
}

/// Removes an active term's own contribution from its full-`C` factors.
pub fn leave_one_out(n: usize, alpha: f64, s_full: f64, q_full: f64) -> Result<FactorPair> {
    let gap = alpha - s_full;
    if gap < DEGENERACY_RTOL * alpha {
        return Err(BcsError::Degenerate { index: n, gap });
    }
    Ok(FactorPair {
        s_factor: alpha * s_full / gap,
        q_factor: alpha * q_full / gap,
    })
}

/// Contribution `l(alpha) = 1/2 [log alpha - log(alpha + S) + Q^2 / (alpha + S)]`
/// of one term to the log evidence; `l(inf) = 0`.
pub fn per_term_gain(alpha: Precision, f: FactorPair) -> f64 {
    match alpha {
        Precision::Inactive => 0.0,
        Precision::Finite(a) => {
            let den = a + f.s_factor;
            0.5 * ((a / den).ln() + f.q_factor * f.q_factor / den)
        }
    }
}

/// Maximizer of `l`: `S^2 / (Q^2 - S)` when `Q^2 > S`, otherwise inactive.
pub fn optimal_alpha(f: FactorPair) -> Precision {
    let theta = f.q_factor * f.q_factor - f.s_factor;
    if theta > 0.0 {
        Precision::Finite(f.s_factor * f.s_factor / theta)
    } else {
        Precision::Inactive
    }
}

/// Splits the log evidence into posterior-mean log-likelihood and KL
/// information: `log p(y) = E[log p(y|w)] - KL(posterior || prior)`.
pub fn evidence_decomposition(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<EvidenceBreakdown> {
    let p = evidence_parts(theta, y, state)?;
    let k = p.k as f64;
    let beta = 1.0 / state.sigma2;
    let mut trace_fit = 0.0;
    let mut kl = 0.0;
    if !state.is_empty() {
        let ta = active_columns(theta, &state.active);
        let gram = ta.tr_mul(&ta);
        trace_fit = p.post.sigma.component_mul(&gram).sum();
        let tr_a_sigma: f64 = state
            .alpha
            .iter()
            .enumerate()
            .map(|(i, a)| a * p.post.sigma[(i, i)])
            .sum();
        let log_det_a: f64 = state.alpha.iter().map(|a| a.ln()).sum();
        kl = 0.5 * (tr_a_sigma + p.mu_a_mu - state.len() as f64 - log_det_a - p.log_det_sigma);
    }
    let data_fit = -0.5 * k * (2.0 * PI * state.sigma2).ln() - 0.5 * beta * (p.resid2 + trace_fit);
    Ok(EvidenceBreakdown {
        log_evidence: data_fit - kl,
        data_fit,
        kl_info: kl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalgen::gen_projection;

    fn instance(k: usize, n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let theta = gen_projection(k, n, seed).unwrap().entries;
        let y = gen_projection(k, 1, seed + 1000).unwrap().entries.column(0).into_owned();
        (theta, y)
    }

    #[test]
    fn scalar_posterior_closed_form() {
        let (theta, y) = instance(5, 1, 3);
        let state = HyperState::new(vec![0], vec![2.0], 0.5).unwrap();
        let post = posterior_moments(&theta, &y, &state).unwrap();
        let norm2 = theta.column(0).norm_squared();
        let sigma = 1.0 / (norm2 / 0.5 + 2.0);
        let mu = sigma * theta.column(0).dot(&y) / 0.5;
        assert!((post.sigma[(0, 0)] - sigma).abs() < 1e-14);
        assert!((post.mu[0] - mu).abs() < 1e-13);
    }

    #[test]
    fn empty_model_evidence() {
        let (theta, y) = instance(6, 4, 8);
        let state = HyperState::empty(0.7);
        let l = log_evidence(&theta, &y, &state, false).unwrap();
        let k = 6.0;
        let expect = -0.5 * (k * (2.0 * PI).ln() + k * 0.7f64.ln() + y.norm_squared() / 0.7);
        assert!((l - expect).abs() < 1e-12);
    }

    #[test]
    fn empty_model_factors() {
        let (theta, y) = instance(6, 4, 9);
        let state = HyperState::empty(0.3);
        for n in 0..4 {
            let f = factors(&theta, &y, &state, n).unwrap();
            let col = theta.column(n);
            assert!((f.s_factor - col.norm_squared() / 0.3).abs() < 1e-12);
            assert!((f.q_factor - col.dot(&y) / 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_alpha_cases() {
        let f = FactorPair {
            s_factor: 1.0,
            q_factor: 2f64.sqrt(),
        };
        match optimal_alpha(f) {
            Precision::Finite(a) => assert!((a - 1.0).abs() < 1e-12),
            Precision::Inactive => panic!("expected finite"),
        }
        let g = FactorPair {
            s_factor: 2.0,
            q_factor: 1.0,
        };
        assert_eq!(optimal_alpha(g), Precision::Inactive);
        let h = FactorPair {
            s_factor: 1.0,
            q_factor: 1.0,
        };
        assert_eq!(optimal_alpha(h), Precision::Inactive);
    }

    #[test]
    fn inactive_gain_is_zero() {
        let f = FactorPair {
            s_factor: 3.0,
            q_factor: -7.0,
        };
        assert_eq!(per_term_gain(Precision::Inactive, f), 0.0);
    }

    #[test]
    fn degenerate_active_term_is_reported() {
        let r = leave_one_out(2, 4.0, 4.0 * (1.0 - 1e-14), 1.0);
        assert!(matches!(r, Err(BcsError::Degenerate { index: 2, .. })), "{r:?}");
        assert!(leave_one_out(2, 4.0, 5.0, 1.0).is_err());
        let ok = leave_one_out(2, 4.0, 3.0, 1.0).unwrap();
        assert!((ok.s_factor - 12.0).abs() < 1e-12);
        assert!((ok.q_factor - 4.0).abs() < 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(HyperState::new(vec![0, 0], vec![1.0, 1.0], 1.0).is_err());
        assert!(HyperState::new(vec![0], vec![0.0], 1.0).is_err());
        assert!(HyperState::new(vec![0], vec![1.0], 0.0).is_err());
        let s = HyperState::new(vec![4], vec![1.0], 1.0).unwrap();
        assert!(s.validate(4).is_err());
        assert!(s.validate(5).is_ok());
    }

    #[test]
    fn set_precision_round_trip() {
        let mut s = HyperState::empty(1.0);
        s.set_precision(3, Precision::Finite(2.0));
        s.set_precision(1, Precision::Finite(5.0));
        assert_eq!(s.active, vec![3, 1]);
        s.set_precision(3, Precision::Finite(4.0));
        assert_eq!(s.precision(3), Precision::Finite(4.0));
        s.set_precision(3, Precision::Inactive);
        assert_eq!(s.active, vec![1]);
        assert_eq!(s.precision(3), Precision::Inactive);
    }

    #[test]
    fn zero_design_has_no_information() {
        let theta = DMatrix::zeros(4, 2);
        let y = DVector::from_vec(vec![1.0, -0.5, 0.2, 0.0]);
        let state = HyperState::new(vec![0, 1], vec![2.0, 0.5], 0.4).unwrap();
        let b = evidence_decomposition(&theta, &y, &state).unwrap();
        assert!(b.kl_info.abs() < 1e-14);
    }

    #[test]
    fn prior_terms_with_zero_rate() {
        let mut s = HyperState::empty(0.25);
        assert_eq!(gamma_prior_log_density(&s), 0.0);
        s.b_param = 0.25;
        // a = 1: log b - b / sigma2
        let expect = 0.25f64.ln() - 1.0;
        assert!((gamma_prior_log_density(&s) - expect).abs() < 1e-14);
    }
}
