use nalgebra::{DMatrix, DVector};

use super::engine::{Engine, Move};
use super::{
    best_single_term, check_inputs, data_scale, empty_result, finish, sigma2_from_parts,
    ReconstructionResult, RunLog, Sigma2Init, SolverConfig, TraceEvent, Variant, SIGMA2_FLOOR_REL,
};
use crate::error::{invalid, Result};
use crate::posterior::HyperState;

/// Accepted actions between noise re-estimates in the updating variant.
const SIGMA2_EVERY: usize = 5;

/// Accepted actions between full rebuilds of the incremental state.
const REBUILD_EVERY: usize = 16;

/// Below `INTERPOLATING_REL * var(y)` the model all but interpolates the data
/// and the evidence is only known to about `MIN_GAIN_REL * |L|`; there a best
/// gain under that bound counts as no improvement.
const INTERPOLATING_REL: f64 = 1e-8;
const MIN_GAIN_REL: f64 = 1e-8;

/// Highest-gain candidate; ties go to the lowest index.
pub(crate) fn best_move(cands: &[Option<Move>]) -> Option<Move> {
    let mut best: Option<Move> = None;
    for mv in cands.iter().flatten() {
        if best.map_or(true, |b| mv.gain > b.gain) {
            best = Some(*mv);
        }
    }
    best
}

/// Re-estimate the engine's noise variance in place. Returns the absolute
/// change of `log sigma2`, or `None` if the update was degenerate.
pub(crate) fn update_sigma2(engine: &mut Engine<'_>, floor: f64) -> Option<f64> {
    let old = engine.sigma2();
    let v = sigma2_from_parts(
        engine.residual_norm2(),
        engine.gamma_sum(),
        engine.k(),
        engine.a_param,
        engine.b_param,
    )
    .ok()?;
    let v = v.max(floor);
    engine.set_sigma2(v);
    Some((v.ln() - old.ln()).abs())
}

/// Greedy sequential reconstruction from a single starting term.
pub fn solve_bottom_up(
    theta: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<ReconstructionResult> {
    check_inputs(theta, y, cfg)?;
    let update = match cfg.variant {
        Variant::BottomUpFixed => false,
        Variant::BottomUpUpdate => true,
        v => return Err(invalid(format!("bottom-up solver called with variant {v}"))),
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
    let mut accepted = 0usize;
    let cap = cfg.inner_cap(theta.ncols());

    while log.inner_iters < cap {
        if let Err(e) = engine.refresh() {
            log.abort(&e);
            break;
        }
        let cands = engine.candidates();
        let st = engine.stationarity(&cands);
        let negligible = || {
            engine.sigma2() < INTERPOLATING_REL * var_y
                && st.max_gain < MIN_GAIN_REL * engine.log_evidence().abs().max(1.0)
        };
        if st.is_stationary(cfg.inner_tol) || negligible() {
            if !update {
                log.converged = true;
                break;
            }
            let l = engine.log_evidence();
            match update_sigma2(&mut engine, floor) {
                Some(change) => {
                    log.push(cfg.record_trace, l, engine.model_size(), engine.sigma2(), TraceEvent::Sigma2Update);
                    if change < cfg.inner_tol {
                        log.converged = true;
                        break;
                    }
                    log.inner_iters += 1;
                    continue;
                }
                None => {
                    log.push(true, l, engine.model_size(), engine.sigma2(), TraceEvent::DegenerateSigma2);
                    log.converged = true;
                    break;
                }
            }
        }
        let Some(mv) = best_move(&cands) else {
            log.converged = true;
            break;
        };
        engine.apply(&mv);
        accepted += 1;
        log.inner_iters += 1;
        if accepted % REBUILD_EVERY == 0 {
            if let Err(e) = engine.rebuild() {
                log.abort(&e);
                break;
            }
        }
        if cfg.record_trace {
            log.push(true, engine.log_evidence(), engine.model_size(), engine.sigma2(), TraceEvent::Step);
        }
        if update && accepted % SIGMA2_EVERY == 0 {
            if update_sigma2(&mut engine, floor).is_none() {
                log.push(true, f64::NAN, engine.model_size(), engine.sigma2(), TraceEvent::DegenerateSigma2);
            }
        }
    }
    log.outer_iters = 1;
    finish(theta, y, engine.state(), cfg, log)
}
