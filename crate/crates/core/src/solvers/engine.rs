//! Incremental model state shared by the sequential solvers.
//!
//! Keeps `Theta_a^T Theta` (the cross-Gram of the active columns against all
//! columns), the posterior, and the full-`C` factors of every column. An
//! action updates all of them with rank-one corrections in O(N' N), plus one
//! new Gram row (O(K N)) for an addition. [`Engine::rebuild`] recomputes
//! everything from a Cholesky factorization to shed accumulated drift.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{BcsError, Result};
use crate::posterior::{optimal_alpha, per_term_gain, FactorPair, HyperState, PosteriorGaussian, Precision};

/// What applying a candidate does to its term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Add,
    Reestimate,
    Delete,
}

/// A candidate action on one term together with its log-evidence gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub index: usize,
    pub kind: MoveKind,
    pub new_alpha: Precision,
    pub old_alpha: Precision,
    pub gain: f64,
}

impl Move {
    /// `|log alpha_new - log alpha_old|` for re-estimations, infinite otherwise.
    pub fn log_alpha_change(&self) -> f64 {
        match (self.old_alpha, self.new_alpha) {
            (Precision::Finite(a), Precision::Finite(b)) => (b.ln() - a.ln()).abs(),
            _ => f64::INFINITY,
        }
    }
}

/// Summary of the candidate set at a fixed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity {
    pub max_gain: f64,
    pub max_log_alpha_change: f64,
    /// Inactive terms with `Q^2 > S (1 + add_rtol)`.
    pub pending_adds: usize,
    pub pending_deletes: usize,
}

impl Stationarity {
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.pending_adds == 0 && self.pending_deletes == 0 && self.max_log_alpha_change < tol
    }
}

/// Relative margin by which `Q^2` must exceed `S` before an inactive term
/// counts as a pending addition for convergence purposes.
pub const ADD_RTOL: f64 = 1e-6;

pub struct Engine<'a> {
    theta: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    col_norm2: Vec<f64>,
    theta_t_y: DVector<f64>,
    active: Vec<usize>,
    alpha: Vec<f64>,
    slot: Vec<Option<usize>>,
    /// Row j is `Theta_{active[j]}^T Theta` (N' x N).
    cross: DMatrix<f64>,
    sigma2: f64,
    pub a_param: f64,
    pub b_param: f64,
    post: PosteriorGaussian,
    /// Full-`C` factors `S~_n`, `Q~_n` for every column.
    s_full: Vec<f64>,
    q_full: Vec<f64>,
    /// Posterior and factors must be rebuilt from scratch.
    stale: bool,
}

impl<'a> Engine<'a> {
    pub fn new(theta: &'a DMatrix<f64>, y: &'a DVector<f64>, state: &HyperState) -> Result<Self> {
        state.validate(theta.ncols())?;
        let n = theta.ncols();
        let mut engine = Self {
            theta,
            y,
            col_norm2: theta.column_iter().map(|c| c.norm_squared()).collect(),
            theta_t_y: theta.tr_mul(y),
            active: Vec::new(),
            alpha: Vec::new(),
            slot: vec![None; n],
            cross: DMatrix::zeros(0, n),
            sigma2: state.sigma2,
            a_param: state.a_param,
            b_param: state.b_param,
            post: PosteriorGaussian::empty(),
            s_full: vec![0.0; n],
            q_full: vec![0.0; n],
            stale: true,
        };
        for (&m, &a) in state.active.iter().zip(&state.alpha) {
            engine.insert_row(m, a);
        }
        Ok(engine)
    }

    pub fn k(&self) -> usize {
        self.theta.nrows()
    }

    pub fn n(&self) -> usize {
        self.theta.ncols()
    }

    pub fn theta(&self) -> &'a DMatrix<f64> {
        self.theta
    }

    pub fn y(&self) -> &'a DVector<f64> {
        self.y
    }

    pub fn model_size(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn set_sigma2(&mut self, sigma2: f64) {
        if sigma2 != self.sigma2 {
            self.sigma2 = sigma2;
            self.stale = true;
        }
    }

    pub fn state(&self) -> HyperState {
        HyperState {
            active: self.active.clone(),
            alpha: self.alpha.clone(),
            sigma2: self.sigma2,
            a_param: self.a_param,
            b_param: self.b_param,
        }
    }

    pub fn precision(&self, n: usize) -> Precision {
        match self.slot[n] {
            Some(i) => Precision::Finite(self.alpha[i]),
            None => Precision::Inactive,
        }
    }

    /// Append term `n` to the bookkeeping without touching the posterior.
    fn insert_row(&mut self, n: usize, alpha: f64) -> DVector<f64> {
        let row = self.theta.tr_mul(&self.theta.column(n));
        let r = self.cross.nrows();
        let cross = std::mem::replace(&mut self.cross, DMatrix::zeros(0, 0));
        self.cross = cross.insert_row(r, 0.0);
        self.cross.row_mut(r).tr_copy_from(&row);
        self.slot[n] = Some(self.active.len());
        self.active.push(n);
        self.alpha.push(alpha);
        self.stale = true;
        row
    }

    fn remove_row(&mut self, n: usize) {
        let Some(i) = self.slot[n] else { return };
        let cross = std::mem::replace(&mut self.cross, DMatrix::zeros(0, 0));
        self.cross = cross.remove_row(i);
        self.active.remove(i);
        self.alpha.remove(i);
        self.slot[n] = None;
        for (j, &m) in self.active.iter().enumerate().skip(i) {
            self.slot[m] = Some(j);
        }
        self.stale = true;
    }

    /// Set the precision of term `n`. The posterior and factors follow by
    /// rank-one updates when they are current, otherwise on the next
    /// [`refresh`](Self::refresh).
    pub fn set_precision(&mut self, n: usize, p: Precision) {
        let fresh = !self.stale;
        match (self.slot[n], p) {
            (Some(j), Precision::Finite(a)) => {
                let old = self.alpha[j];
                self.alpha[j] = a;
                if fresh {
                    self.update_reestimate(j, a - old);
                }
            }
            (Some(j), Precision::Inactive) => {
                if fresh {
                    self.update_delete(j);
                }
                self.remove_row(n);
                self.stale = !fresh;
            }
            (None, Precision::Finite(a)) => {
                let row = self.insert_row(n, a);
                if fresh {
                    self.update_add(n, a, &row);
                }
                self.stale = !fresh;
            }
            (None, Precision::Inactive) => {}
        }
    }

    pub fn apply(&mut self, mv: &Move) {
        self.set_precision(mv.index, mv.new_alpha);
    }

    /// `beta * s^T cross`, the change direction of every column's factors.
    fn direction(&self, s: &DVector<f64>) -> DVector<f64> {
        self.cross.tr_mul(s) / self.sigma2
    }

    fn update_reestimate(&mut self, j: usize, delta: f64) {
        let s = self.post.sigma.column(j).clone_owned();
        let kappa = delta / (1.0 + delta * s[j]);
        let mu_j = self.post.mu[j];
        let e = self.direction(&s);
        self.post.sigma.ger(-kappa, &s, &s, 1.0);
        self.post.mu.axpy(-kappa * mu_j, &s, 1.0);
        for m in 0..self.n() {
            self.s_full[m] += kappa * e[m] * e[m];
            self.q_full[m] += kappa * mu_j * e[m];
        }
    }

    fn update_delete(&mut self, j: usize) {
        let s = self.post.sigma.column(j).clone_owned();
        let d = s[j];
        let mu_j = self.post.mu[j];
        let e = self.direction(&s);
        self.post.sigma.ger(-1.0 / d, &s, &s, 1.0);
        self.post.mu.axpy(-mu_j / d, &s, 1.0);
        let sigma = std::mem::replace(&mut self.post.sigma, DMatrix::zeros(0, 0));
        self.post.sigma = sigma.remove_row(j).remove_column(j);
        let mu = std::mem::replace(&mut self.post.mu, DVector::zeros(0));
        self.post.mu = mu.remove_row(j);
        for m in 0..self.n() {
            self.s_full[m] += e[m] * e[m] / d;
            self.q_full[m] += mu_j * e[m] / d;
        }
    }

    /// `row` is `Theta^T Theta_n`; the cross matrix already holds it as its
    /// last row.
    fn update_add(&mut self, n: usize, alpha: f64, row: &DVector<f64>) {
        let beta = 1.0 / self.sigma2;
        let m_old = self.post.mu.len();
        let d = 1.0 / (alpha + self.s_full[n]);
        let mu_n = d * self.q_full[n];
        let c_n = self.cross.column(n).rows(0, m_old).clone_owned();
        let comm = &self.post.sigma * c_n * beta;
        // e = beta (row - cross_old^T comm)
        let old_cross = self.cross.rows(0, m_old);
        let e = (row - old_cross.tr_mul(&comm)) * beta;

        let mut sigma = DMatrix::zeros(m_old + 1, m_old + 1);
        let mut block = self.post.sigma.clone();
        block.ger(d, &comm, &comm, 1.0);
        sigma.view_mut((0, 0), (m_old, m_old)).copy_from(&block);
        for i in 0..m_old {
            sigma[(i, m_old)] = -d * comm[i];
            sigma[(m_old, i)] = -d * comm[i];
        }
        sigma[(m_old, m_old)] = d;
        let mut mu = DVector::zeros(m_old + 1);
        for i in 0..m_old {
            mu[i] = self.post.mu[i] - mu_n * comm[i];
        }
        mu[m_old] = mu_n;
        self.post = PosteriorGaussian { mu, sigma };
        for m in 0..self.n() {
            self.s_full[m] -= d * e[m] * e[m];
            self.q_full[m] -= mu_n * e[m];
        }
    }

    /// Rebuild `mu`, `Sigma` and all factors from scratch if the state was
    /// marked stale.
    pub fn refresh(&mut self) -> Result<()> {
        if !self.stale {
            return Ok(());
        }
        self.rebuild()
    }

    /// Unconditional rebuild; discards any drift from rank-one updates.
    pub fn rebuild(&mut self) -> Result<()> {
        let m = self.active.len();
        let n = self.n();
        let beta = 1.0 / self.sigma2;
        if m == 0 {
            self.post = PosteriorGaussian::empty();
            for j in 0..n {
                self.s_full[j] = beta * self.col_norm2[j];
                self.q_full[j] = beta * self.theta_t_y[j];
            }
            self.stale = false;
            return Ok(());
        }
        let chol = Cholesky::new(self.precision_matrix()).ok_or_else(|| BcsError::IllConditioned {
            active: self.active.clone(),
        })?;
        let rhs = DVector::from_iterator(m, self.active.iter().map(|&c| beta * self.theta_t_y[c]));
        let mu = chol.solve(&rhs);
        let mut sigma = chol.inverse();
        for i in 0..m {
            for j in 0..i {
                let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
                sigma[(i, j)] = v;
                sigma[(j, i)] = v;
            }
        }
        let sc = &sigma * &self.cross;
        let cm = self.cross.tr_mul(&mu);
        for j in 0..n {
            let quad = self.cross.column(j).dot(&sc.column(j));
            self.s_full[j] = beta * self.col_norm2[j] - beta * beta * quad;
            self.q_full[j] = beta * (self.theta_t_y[j] - cm[j]);
        }
        self.post = PosteriorGaussian { mu, sigma };
        self.stale = false;
        Ok(())
    }

    /// `sigma^-2 Theta_a^T Theta_a + A`.
    fn precision_matrix(&self) -> DMatrix<f64> {
        let m = self.active.len();
        let beta = 1.0 / self.sigma2;
        let mut prec = DMatrix::zeros(m, m);
        for (j, &col) in self.active.iter().enumerate() {
            for i in 0..m {
                prec[(i, j)] = beta * self.cross[(i, col)];
            }
        }
        for i in 0..m {
            prec[(i, i)] += self.alpha[i];
        }
        prec
    }

    /// Current posterior. Panics if [`refresh`](Self::refresh) was not called
    /// after the last change.
    pub fn posterior(&self) -> &PosteriorGaussian {
        assert!(!self.stale, "posterior is stale; call refresh() first");
        &self.post
    }

    /// Leave-one-out factors of term `n` at the current state.
    ///
    /// Active terms use `S = 1/Sigma_nn - alpha`, `Q = mu_n / Sigma_nn`, which
    /// equal the `alpha S~/(alpha - S~)` conversion but do not cancel
    /// catastrophically when `sigma2` is tiny.
    pub fn factor(&self, n: usize) -> FactorPair {
        let post = self.posterior();
        match self.slot[n] {
            Some(i) => {
                let d = post.sigma[(i, i)];
                FactorPair {
                    s_factor: 1.0 / d - self.alpha[i],
                    q_factor: post.mu[i] / d,
                }
            }
            None => FactorPair {
                s_factor: self.s_full[n],
                q_factor: self.q_full[n],
            },
        }
    }

    /// Best action for term `n`, or `None` when the term is inactive and
    /// should stay so.
    pub fn candidate(&self, n: usize) -> Option<Move> {
        let f = self.factor(n);
        let old = self.precision(n);
        if !(f.s_factor > 0.0) {
            // only reachable through rounding once Theta_n lies in the active span
            return match old {
                Precision::Inactive => None,
                Precision::Finite(_) => Some(Move {
                    index: n,
                    kind: MoveKind::Delete,
                    new_alpha: Precision::Inactive,
                    old_alpha: old,
                    gain: 0.0,
                }),
            };
        }
        let new = optimal_alpha(f);
        let kind = match (old, new) {
            (Precision::Inactive, Precision::Inactive) => return None,
            (Precision::Inactive, Precision::Finite(_)) => MoveKind::Add,
            (Precision::Finite(_), Precision::Finite(_)) => MoveKind::Reestimate,
            (Precision::Finite(_), Precision::Inactive) => MoveKind::Delete,
        };
        Some(Move {
            index: n,
            kind,
            new_alpha: new,
            old_alpha: old,
            gain: per_term_gain(new, f) - per_term_gain(old, f),
        })
    }

    pub fn candidates(&self) -> Vec<Option<Move>> {
        (0..self.n()).map(|n| self.candidate(n)).collect()
    }

    pub fn stationarity(&self, candidates: &[Option<Move>]) -> Stationarity {
        let mut st = Stationarity {
            max_gain: 0.0,
            max_log_alpha_change: 0.0,
            pending_adds: 0,
            pending_deletes: 0,
        };
        for mv in candidates.iter().flatten() {
            st.max_gain = st.max_gain.max(mv.gain);
            match mv.kind {
                MoveKind::Reestimate => {
                    st.max_log_alpha_change = st.max_log_alpha_change.max(mv.log_alpha_change())
                }
                MoveKind::Delete => st.pending_deletes += 1,
                MoveKind::Add => {
                    let f = self.factor(mv.index);
                    if f.q_factor * f.q_factor > f.s_factor * (1.0 + ADD_RTOL) {
                        st.pending_adds += 1;
                    }
                }
            }
        }
        st
    }

    /// Coefficients embedded in all N positions.
    pub fn coefficients(&self) -> DVector<f64> {
        let mut w = DVector::zeros(self.n());
        let post = self.posterior();
        for (i, &n) in self.active.iter().enumerate() {
            w[n] = post.mu[i];
        }
        w
    }

    pub fn residual_norm2(&self) -> f64 {
        let post = self.posterior();
        let mut r = self.y.clone_owned();
        for (i, &n) in self.active.iter().enumerate() {
            r.axpy(-post.mu[i], &self.theta.column(n), 1.0);
        }
        r.norm_squared()
    }

    /// `sum_n (1 - alpha_n Sigma_nn)` over active terms.
    pub fn gamma_sum(&self) -> f64 {
        let post = self.posterior();
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| 1.0 - a * post.sigma[(i, i)])
            .sum()
    }

    /// Log evidence at the current state, without prior terms. Evaluated
    /// from a fresh factorization so that it carries no update drift.
    pub fn log_evidence(&self) -> f64 {
        let k = self.k() as f64;
        let base = k * ((2.0 * std::f64::consts::PI).ln() + self.sigma2.ln());
        if self.active.is_empty() {
            return -0.5 * (base + self.y.norm_squared() / self.sigma2);
        }
        let Some(chol) = Cholesky::new(self.precision_matrix()) else {
            return f64::NAN;
        };
        let beta = 1.0 / self.sigma2;
        let m = self.active.len();
        let rhs = DVector::from_iterator(m, self.active.iter().map(|&c| beta * self.theta_t_y[c]));
        let mu = chol.solve(&rhs);
        let log_det_sigma = -2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let log_det_a: f64 = self.alpha.iter().map(|a| a.ln()).sum();
        let mu_a_mu: f64 = mu.iter().zip(&self.alpha).map(|(v, a)| a * v * v).sum();
        let mut r = self.y.clone_owned();
        for (i, &n) in self.active.iter().enumerate() {
            r.axpy(-mu[i], &self.theta.column(n), 1.0);
        }
        -0.5 * (base - log_det_a - log_det_sigma + r.norm_squared() / self.sigma2 + mu_a_mu)
    }
}
