use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bottom_up::update_sigma2;
use super::engine::{Engine, Move, MoveKind};
use super::top_down::{sweep, SweepOptions};
use super::{
    best_single_term, check_inputs, data_scale, empty_result, finish, sigma2_update,
    ReconstructionResult, RunLog, Sigma2Init, SolverConfig, TraceEvent, Variant, GAIN_TOL,
    SIGMA2_FLOOR_REL,
};
use crate::error::{invalid, Result};
use crate::posterior::{self, HyperState};
use crate::rng;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PassOutcome {
    pub accepted: usize,
    pub membership_changed: bool,
    /// Largest gain at the start of the pass.
    pub max_gain: f64,
    /// The model outgrew the number of measurements and the pass stopped.
    pub overflow: bool,
}

fn probabilities(cands: &[Option<Move>]) -> (Vec<f64>, f64) {
    let max_gain = cands.iter().flatten().map(|m| m.gain).fold(0.0, f64::max);
    let p = cands
        .iter()
        .map(|c| match c {
            Some(m) if max_gain > 0.0 => (m.gain / max_gain).max(0.0),
            _ => 0.0,
        })
        .collect();
    (p, max_gain)
}

/// One randomized sweep over all terms. Term `n` is visited in a random
/// order; its current best action is taken when `p_n >= u_n`, with
/// `p_n = gain_n / max gain` normalized by the largest gain at the start of
/// the pass. The state is updated right after every accepted action.
pub(crate) fn run_pass(engine: &mut Engine<'_>, rng: &mut ChaCha8Rng) -> Result<PassOutcome> {
    engine.rebuild()?;
    let (_, max_gain) = probabilities(&engine.candidates());
    let mut out = PassOutcome {
        max_gain,
        ..PassOutcome::default()
    };
    if !(max_gain > 0.0) {
        return Ok(out);
    }
    let mut order: Vec<usize> = (0..engine.n()).collect();
    order.shuffle(rng);
    let k = engine.k();
    for n in order {
        let u: f64 = rng.random();
        let Some(mv) = engine.candidate(n) else { continue };
        if mv.gain / max_gain >= u {
            engine.apply(&mv);
            out.accepted += 1;
            if mv.kind != MoveKind::Reestimate {
                out.membership_changed = true;
            }
            if engine.model_size() > k {
                out.overflow = true;
                break;
            }
        }
    }
    engine.rebuild()?;
    Ok(out)
}

/// Acceptance probabilities `p_n = gain_n / max_m gain_m` at `state`.
pub fn acceptance_probabilities(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    state: &HyperState,
) -> Result<Vec<f64>> {
    let mut engine = Engine::new(theta, y, state)?;
    engine.refresh()?;
    Ok(probabilities(&engine.candidates()).0)
}

/// A single stochastic pass from `state`, with the permutation and uniform
/// draws taken from a stream seeded by `seed`.
pub fn stochastic_pass(
    state: &HyperState,
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    seed: u64,
) -> Result<HyperState> {
    let mut engine = Engine::new(theta, y, state)?;
    let mut rng = rng::stream(seed, "pass", 0);
    run_pass(&mut engine, &mut rng)?;
    Ok(engine.state())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverflowOutcome {
    pub state: HyperState,
    /// The pruned model fits in the measurement count and the sweep settled.
    pub converged: bool,
    pub iters: usize,
}

/// Every inactive nonzero column joins the model with precision
/// `1 / mean(1 / alpha_active)`.
pub(crate) fn expand_to_full(state: &HyperState, theta: &DMatrix<f64>) -> HyperState {
    let mean_var = if state.is_empty() {
        1.0
    } else {
        state.alpha.iter().map(|a| 1.0 / a).sum::<f64>() / state.len() as f64
    };
    let mut full = state.clone();
    for j in 0..theta.ncols() {
        if full.slot(j).is_none() && theta.column(j).norm_squared() > 0.0 {
            full.active.push(j);
            full.alpha.push(1.0 / mean_var);
        }
    }
    full
}

/// Recovery for a model with more terms than measurements: give every
/// inactive term the mean prior variance of the active ones, prune with
/// fixed-noise top-down sweeps, then re-estimate the noise variance once.
pub fn overflow_prune_with(
    state: &HyperState,
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<OverflowOutcome> {
    state.validate(theta.ncols())?;
    let n = theta.ncols();
    let k = y.len();
    if state.len() <= k {
        return Ok(OverflowOutcome {
            state: state.clone(),
            converged: true,
            iters: 0,
        });
    }
    let full = expand_to_full(state, theta);
    let floor = SIGMA2_FLOOR_REL * data_scale(y);
    let opts = SweepOptions {
        update_sigma2: false,
        tol: cfg.inner_tol,
        cap: cfg.alpha_prune_cap,
        max_iters: cfg.inner_cap(n),
        sigma2_floor: floor,
        record_trace: false,
    };
    let mut log = RunLog::default();
    let (mut pruned, settled) = sweep(theta, y, full, &opts, &mut log)?;
    let ta = posterior::active_columns(theta, &pruned.active);
    let post = posterior::posterior_moments(&ta, y, &pruned)?;
    if let Ok(v) = sigma2_update(&pruned, &post.mu, &post.sigma, &ta, y) {
        pruned.sigma2 = v.max(floor);
    }
    Ok(OverflowOutcome {
        converged: settled && pruned.len() <= k,
        state: pruned,
        iters: log.inner_iters,
    })
}

/// [`overflow_prune_with`] under default tolerances.
pub fn overflow_prune(state: &HyperState, theta: &DMatrix<f64>, y: &DVector<f64>) -> Result<HyperState> {
    let cfg = SolverConfig::new(Variant::So);
    Ok(overflow_prune_with(state, theta, y, &cfg)?.state)
}

fn relative_change(w: &DVector<f64>, prev: &DVector<f64>) -> f64 {
    let den = prev.norm_squared();
    let num = (w - prev).norm_squared();
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Stochastic-pass reconstruction with an outer noise re-estimation loop.
pub fn solve_bcs_so(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    check_inputs(theta, y, cfg)?;
    let star = match cfg.variant {
        Variant::So => false,
        Variant::SoStar => true,
        v => return Err(invalid(format!("stochastic solver called with variant {v}"))),
    };
    let Some(start) = best_single_term(theta, y) else {
        return empty_result(theta, cfg);
    };
    let var_y = data_scale(y);
    let floor = SIGMA2_FLOOR_REL * var_y;
    let sigma2 = match cfg.sigma2_init {
        Sigma2Init::Fixed(v) => v,
        Sigma2Init::FromState => cfg.fixed_sigma2_frac * var_y,
    };
    let init = HyperState::new(vec![start], vec![1.0], sigma2)?;
    let mut engine = Engine::new(theta, y, &init)?;
    let mut log = RunLog::default();
    engine.refresh()?;
    if update_sigma2(&mut engine, floor).is_none() {
        log.push(true, f64::NAN, 1, engine.sigma2(), TraceEvent::DegenerateSigma2);
    }

    let mut rng = rng::stream(cfg.seed, "so", 0);
    let inner_cap = cfg.inner_cap(theta.ncols());
    let mut prev_w: Option<DVector<f64>> = None;

    'outer: for _ in 0..cfg.max_outer_iters {
        log.outer_iters += 1;
        let mut passes = 0;
        loop {
            if passes >= inner_cap {
                break;
            }
            passes += 1;
            log.inner_iters += 1;
            let out = match run_pass(&mut engine, &mut rng) {
                Ok(o) => o,
                Err(e) => {
                    log.abort(&e);
                    break 'outer;
                }
            };
            if out.overflow {
                let l = engine.log_evidence();
                log.push(cfg.record_trace, l, engine.model_size(), engine.sigma2(), TraceEvent::Overflow);
                let rec = overflow_prune_with(&engine.state(), theta, y, cfg)?;
                log.inner_iters += rec.iters;
                log.converged = rec.converged;
                if !rec.converged {
                    log.diagnostic = Some("model outgrew the measurement count; pruned top-down".into());
                }
                return finish(theta, y, rec.state, cfg, log);
            }
            if cfg.record_trace {
                log.push(true, engine.log_evidence(), engine.model_size(), engine.sigma2(), TraceEvent::Step);
            }
            if !(out.max_gain > 0.0) {
                break;
            }
            let st = engine.stationarity(&engine.candidates());
            if st.is_stationary(cfg.inner_tol) && (out.accepted == 0 || st.max_gain < GAIN_TOL) {
                break;
            }
        }
        let w = engine.coefficients();
        if let Some(prev) = &prev_w {
            if relative_change(&w, prev) < cfg.outer_eps {
                log.converged = true;
                break;
            }
        }
        prev_w = Some(w);
        let l = engine.log_evidence();
        match update_sigma2(&mut engine, floor) {
            Some(_) => {
                log.push(cfg.record_trace, l, engine.model_size(), engine.sigma2(), TraceEvent::Sigma2Update)
            }
            None => log.push(true, l, engine.model_size(), engine.sigma2(), TraceEvent::DegenerateSigma2),
        }
        if star {
            engine.b_param = engine.sigma2();
        }
    }
    finish(theta, y, engine.state(), cfg, log)
}
