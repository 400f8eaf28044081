//! Reconstruction algorithms.
//!
//! * [`solve_top_down`]: start from every term, iterate the fixed-point
//!   precision update and prune diverging precisions.
//! * [`solve_bottom_up`]: start from one term and greedily apply the single
//!   add / re-estimate / delete action with the largest evidence gain. The
//!   `BottomUpFixed` variant holds `sigma2 = 0.1 var(y)`; `BottomUpUpdate`
//!   re-estimates it every five accepted actions.
//! * [`solve_bcs_so`]: stochastic acceptance of actions in proportion to
//!   their gain, alternated with noise-variance re-estimation until the
//!   reconstruction stops moving. `SoStar` also re-estimates the Gamma rate
//!   `b` of the noise-precision prior.

mod bottom_up;
pub mod engine;
mod stochastic;
mod top_down;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, BcsError, Result};
use crate::metrics::{self, ErrorBarMean};
use crate::posterior::{self, HyperState, PosteriorGaussian};
use crate::signalgen::{Basis, BasisKind, Signal, SparseCoefficients};

pub use bottom_up::solve_bottom_up;
pub use stochastic::{
    acceptance_probabilities, overflow_prune, overflow_prune_with, solve_bcs_so, stochastic_pass,
    OverflowOutcome,
};
pub use top_down::solve_top_down;

/// Noise-variance floor relative to `var(y)`.
pub const SIGMA2_FLOOR_REL: f64 = 1e-12;

/// Inner loops of the stochastic solver stop once the largest pending gain is
/// below this (in nats).
pub const GAIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    TopDown,
    BottomUpFixed,
    BottomUpUpdate,
    So,
    SoStar,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::BottomUpFixed,
        Variant::BottomUpUpdate,
        Variant::TopDown,
        Variant::So,
        Variant::SoStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TopDown => "top_down",
            Variant::BottomUpFixed => "bottom_up_fixed",
            Variant::BottomUpUpdate => "bottom_up_update",
            Variant::So => "so",
            Variant::SoStar => "so_star",
        }
    }

    /// Conventional short label (BCS-T, BCS-B-F, ...).
    pub fn label(self) -> &'static str {
        match self {
            Variant::TopDown => "BCS-T",
            Variant::BottomUpFixed => "BCS-B-F",
            Variant::BottomUpUpdate => "BCS-B-U",
            Variant::So => "BCS-SO",
            Variant::SoStar => "BCS-SO*",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Variant::So | Variant::SoStar)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = BcsError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "top_down" | "bcs_t" | "t" => Variant::TopDown,
            "bottom_up_fixed" | "bcs_b_f" | "b_f" => Variant::BottomUpFixed,
            "bottom_up_update" | "bcs_b_u" | "b_u" => Variant::BottomUpUpdate,
            "so" | "bcs_so" => Variant::So,
            "so_star" | "so*" | "bcs_so*" | "bcs_so_star" => Variant::SoStar,
            _ => return Err(invalid(format!("unknown solver variant '{s}'"))),
        })
    }
}

/// Where the starting noise variance comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma2Init {
    /// Use this value.
    Fixed(f64),
    /// Derive it from the data with the variant's own rule.
    FromState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Convergence threshold on `|Delta log alpha_n|`.
    pub inner_tol: f64,
    /// Relative squared change of the reconstruction that ends the outer loop.
    pub outer_eps: f64,
    pub alpha_prune_cap: f64,
    pub sigma2_init: Sigma2Init,
    /// `sigma2 = fixed_sigma2_frac * var(y)` for the fixed-noise bottom-up run
    /// and the default start of the other variants.
    pub fixed_sigma2_frac: f64,
    /// Cap on inner iterations; `None` means `10 N`.
    pub max_inner_iters: Option<usize>,
    pub max_outer_iters: usize,
    pub seed: u64,
    /// Basis the coefficients live in; used to map them back to samples.
    pub basis: BasisKind,
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            inner_tol: 1e-6,
            outer_eps: 1e-5,
            alpha_prune_cap: 1e12,
            sigma2_init: Sigma2Init::FromState,
            fixed_sigma2_frac: 0.1,
            max_inner_iters: None,
            max_outer_iters: 50,
            seed: 0,
            basis: BasisKind::Identity,
            record_trace: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `outer_eps = max(noise_pct, 1e-5)`.
    pub fn with_noise_level(mut self, noise_pct: f64) -> Self {
        self.outer_eps = noise_pct.max(1e-5);
        self
    }

    pub fn with_basis(mut self, basis: BasisKind) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inner_tol > 0.0) || !(self.outer_eps > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if !(self.alpha_prune_cap > 1.0) {
            return Err(invalid("alpha prune cap must exceed 1"));
        }
        if let Sigma2Init::Fixed(v) = self.sigma2_init {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("initial noise variance {v} must be positive")));
            }
        }
        if self.max_inner_iters == Some(0) || self.max_outer_iters == 0 {
            return Err(invalid("iteration caps must be positive"));
        }
        Ok(())
    }

    pub(crate) fn inner_cap(&self, n: usize) -> usize {
        self.max_inner_iters.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// One accepted action (bottom-up) or pass (stochastic) or sweep (top-down).
    Step,
    Sigma2Update,
    /// The noise update denominator was not positive; the old value was kept.
    DegenerateSigma2,
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub log_evidence: f64,
    pub model_size: usize,
    pub sigma2: f64,
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub variant: Variant,
    /// Posterior mean in the sample domain, `Psi mu`.
    pub x_hat: Signal,
    pub w_hat: SparseCoefficients,
    /// One posterior standard deviation per sample.
    pub error_bars: Vec<f64>,
    /// Mean error bar over the nonzero entries of `error_bars`.
    pub mean_error_bar: f64,
    pub final_log_evidence: f64,
    pub active_set: Vec<usize>,
    pub alpha: Vec<f64>,
    pub sigma2_final: f64,
    pub b_final: f64,
    pub posterior: PosteriorGaussian,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
    /// Why a run stopped early, when it did.
    pub diagnostic: Option<String>,
}

impl ReconstructionResult {
    pub fn model_size(&self) -> usize {
        self.active_set.len()
    }
}

/// Counters and flags accumulated by a solver run.
#[derive(Debug, Default)]
pub(crate) struct RunLog {
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRecord>,
    pub diagnostic: Option<String>,
}

impl RunLog {
    pub fn push(&mut self, record: bool, log_evidence: f64, model_size: usize, sigma2: f64, event: TraceEvent) {
        if record || event == TraceEvent::DegenerateSigma2 {
            self.trace.push(TraceRecord {
                log_evidence,
                model_size,
                sigma2,
                event,
            });
        }
    }

    pub fn abort(&mut self, err: &BcsError) {
        self.converged = false;
        self.diagnostic = Some(err.to_string());
    }
}

/// Sample variance with the `K - 1` denominator.
pub fn sample_variance(y: &DVector<f64>) -> f64 {
    let k = y.len();
    if k == 0 {
        return 0.0;
    }
    let mean = y.mean();
    let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    ss / (k.max(2) - 1) as f64
}

/// `var(y)`, or the mean square when `y` is constant, so that nonzero data
/// always yields a positive scale.
pub(crate) fn data_scale(y: &DVector<f64>) -> f64 {
    let v = sample_variance(y);
    if v > 0.0 {
        v
    } else {
        y.norm_squared() / y.len().max(1) as f64
    }
}

/// Noise-variance re-estimate
/// `(||y - Theta mu||^2 + 2b) / (K - sum_active (1 - alpha_n Sigma_nn) + 2(a - 1))`.
pub fn sigma2_update(
    state: &HyperState,
    mu: &DVector<f64>,
    sigma_mat: &DMatrix<f64>,
    theta_active: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let resid2 = if state.is_empty() {
        y.norm_squared()
    } else {
        (y - theta_active * mu).norm_squared()
    };
    let gamma: f64 = state
        .alpha
        .iter()
        .enumerate()
        .map(|(i, a)| 1.0 - a * sigma_mat[(i, i)])
        .sum();
    sigma2_from_parts(resid2, gamma, y.len(), state.a_param, state.b_param)
}

pub(crate) fn sigma2_from_parts(resid2: f64, gamma: f64, k: usize, a: f64, b: f64) -> Result<f64> {
    let den = k as f64 - gamma + 2.0 * (a - 1.0);
    if !(den > 0.0) {
        return Err(BcsError::DegenerateUpdate(den));
    }
    Ok((resid2 + 2.0 * b) / den)
}

pub(crate) fn check_inputs(theta: &DMatrix<f64>, y: &DVector<f64>, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if theta.nrows() != y.len() {
        return Err(invalid(format!(
            "design matrix has {} rows but there are {} measurements",
            theta.nrows(),
            y.len()
        )));
    }
    if theta.ncols() == 0 || theta.nrows() == 0 {
        return Err(invalid("design matrix must be non-empty"));
    }
    if y.iter().any(|v| !v.is_finite()) || theta.iter().any(|v| !v.is_finite()) {
        return Err(invalid("inputs must be finite"));
    }
    if cfg.basis == BasisKind::Haar {
        Basis::new(BasisKind::Haar, theta.ncols())?;
    }
    Ok(())
}

/// Term maximizing `(Theta_n^T y)^2 / ||Theta_n||^2`.
pub(crate) fn best_single_term(theta: &DMatrix<f64>, y: &DVector<f64>) -> Option<usize> {
    let mut best = None;
    let mut best_val = 0.0;
    for (n, col) in theta.column_iter().enumerate() {
        let norm2 = col.norm_squared();
        if norm2 == 0.0 {
            continue;
        }
        let v = col.dot(y).powi(2) / norm2;
        if v > best_val {
            best_val = v;
            best = Some(n);
        }
    }
    best
}

/// Result for data with no energy: every term pruned.
pub(crate) fn empty_result(theta: &DMatrix<f64>, cfg: &SolverConfig) -> Result<ReconstructionResult> {
    let n = theta.ncols();
    let basis = Basis::new(cfg.basis, n)?;
    let w = SparseCoefficients::new(vec![0.0; n], basis.kind())?;
    Ok(ReconstructionResult {
        variant: cfg.variant,
        x_hat: Signal::zeros(n),
        w_hat: w,
        error_bars: vec![0.0; n],
        mean_error_bar: 0.0,
        final_log_evidence: f64::INFINITY,
        active_set: Vec::new(),
        alpha: Vec::new(),
        sigma2_final: 0.0,
        b_final: 0.0,
        posterior: PosteriorGaussian::empty(),
        inner_iters: 0,
        outer_iters: 0,
        converged: true,
        trace: Vec::new(),
        diagnostic: None,
    })
}

/// Build the reconstruction from a final hyperparameter state.
pub(crate) fn finish(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: HyperState,
    cfg: &SolverConfig,
    log: RunLog,
) -> Result<ReconstructionResult> {
    let n = theta.ncols();
    let basis = Basis::new(cfg.basis, n)?;
    let ta = posterior::active_columns(theta, &state.active);
    let post = posterior::posterior_moments(&ta, y, &state)?;
    let mut w = vec![0.0; n];
    for (i, &m) in state.active.iter().enumerate() {
        w[m] = post.mu[i];
    }
    let w_hat = SparseCoefficients::new(w, basis.kind())?;
    let x_hat = Signal::new(basis.synthesize(w_hat.values.as_slice())?)?;
    let bars = metrics::error_bars(&post.sigma, &basis, &state.active, ErrorBarMean::NonzeroTerms)?;
    let final_log_evidence = posterior::log_evidence(theta, y, &state, false)?;
    Ok(ReconstructionResult {
        variant: cfg.variant,
        x_hat,
        w_hat,
        error_bars: bars.bars,
        mean_error_bar: bars.mean,
        final_log_evidence,
        active_set: state.active.clone(),
        alpha: state.alpha.clone(),
        sigma2_final: state.sigma2,
        b_final: state.b_param,
        posterior: post,
        inner_iters: log.inner_iters,
        outer_iters: log.outer_iters,
        converged: log.converged,
        trace: log.trace,
        diagnostic: log.diagnostic,
    })
}

/// Run the algorithm selected by `cfg.variant`.
pub fn solve(theta: &DMatrix<f64>, y: &DVector<f64>, cfg: &SolverConfig) -> Result<ReconstructionResult> {
    match cfg.variant {
        Variant::TopDown => solve_top_down(theta, y, cfg),
        Variant::BottomUpFixed | Variant::BottomUpUpdate => solve_bottom_up(theta, y, cfg),
        Variant::So | Variant::SoStar => solve_bcs_so(theta, y, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            assert_eq!(v.label().parse::<Variant>().unwrap(), v);
        }
        assert!("bp".parse::<Variant>().is_err());
    }

    #[test]
    fn sigma2_update_empty_model() {
        let y = DVector::from_vec(vec![1.0, -2.0, 2.0]);
        let state = HyperState::empty(1.0);
        let v = sigma2_update(&state, &DVector::zeros(0), &DMatrix::zeros(0, 0), &DMatrix::zeros(3, 0), &y)
            .unwrap();
        assert!((v - 9.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sigma2_update_degenerate_denominator() {
        let r = sigma2_from_parts(1.0, 3.0, 3, 1.0, 0.0);
        assert!(matches!(r, Err(BcsError::DegenerateUpdate(_))));
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::new(Variant::So);
        assert!(c.validate().is_ok());
        c.inner_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(Variant::So);
        c.sigma2_init = Sigma2Init::Fixed(-1.0);
        assert!(c.validate().is_err());
        assert_eq!(SolverConfig::new(Variant::So).with_noise_level(0.05).outer_eps, 0.05);
        assert_eq!(SolverConfig::new(Variant::So).with_noise_level(0.0).outer_eps, 1e-5);
    }
}
