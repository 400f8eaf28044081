//! Browser bindings for three small demonstrations: reconstructing a spike
//! train from random projections, denoising a signal by Haar thresholding, and
//! tracing the log evidence of a fitted model as the noise variance varies.

use nalgebra::{DMatrix, DVector};
use robust_bcs::metrics::{count_below, reconstruction_error};
use robust_bcs::posterior::{log_evidence, HyperState};
use robust_bcs::signalgen::{self, Basis, BasisKind, SparseCoefficients, SpikeKind};
use robust_bcs::solvers::{solve, SolverConfig, Variant};
use robust_bcs::BcsError;
use wasm_bindgen::prelude::*;

fn js_err(e: BcsError) -> JsError {
    JsError::new(&e.to_string())
}

fn spike_kind(name: &str) -> Result<SpikeKind, JsError> {
    match name {
        "uniform" => Ok(SpikeKind::Uniform),
        "gaussian" => Ok(SpikeKind::Gaussian),
        other => Err(JsError::new(&format!("unknown spike kind '{other}'"))),
    }
}

/// Outcome of [`reconstruct_spikes`].
#[wasm_bindgen]
pub struct Reconstruction {
    original: Vec<f64>,
    estimate: Vec<f64>,
    error_bars: Vec<f64>,
    recon_error: f64,
    model_size: usize,
    sigma2: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn original(&self) -> Vec<f64> {
        self.original.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }

    #[wasm_bindgen(getter, js_name = errorBars)]
    pub fn error_bars(&self) -> Vec<f64> {
        self.error_bars.clone()
    }

    #[wasm_bindgen(getter, js_name = reconError)]
    pub fn recon_error(&self) -> f64 {
        self.recon_error
    }

    #[wasm_bindgen(getter, js_name = modelSize)]
    pub fn model_size(&self) -> usize {
        self.model_size
    }

    #[wasm_bindgen(getter)]
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

struct Problem {
    theta: DMatrix<f64>,
    y: DVector<f64>,
}

fn spike_problem(
    n: usize,
    spikes: usize,
    kind: &str,
    k: usize,
    noise_pct: f64,
    seed: u64,
) -> Result<(signalgen::Signal, Problem), JsError> {
    let x = signalgen::gen_spikes(n, spikes, spike_kind(kind)?, seed).map_err(js_err)?;
    let phi = signalgen::gen_projection(k, n, seed.wrapping_add(1)).map_err(js_err)?;
    let y = signalgen::compress(&phi, &x, noise_pct, seed.wrapping_add(2)).map_err(js_err)?;
    let theta = signalgen::design_matrix(&phi, &Basis::identity(n)).map_err(js_err)?;
    Ok((x, Problem { theta, y: y.values }))
}

/// Draw `spikes` spikes of the given kind (`uniform` or `gaussian`) in a
/// length-`n` signal, observe it through `k` random projections with relative
/// noise `noise_pct`, and reconstruct it with `variant`.
#[wasm_bindgen(js_name = reconstructSpikes)]
pub fn reconstruct_spikes(
    n: usize,
    spikes: usize,
    kind: &str,
    k: usize,
    noise_pct: f64,
    variant: &str,
    seed: u64,
) -> Result<Reconstruction, JsError> {
    let variant: Variant = variant.parse().map_err(js_err)?;
    let (x, p) = spike_problem(n, spikes, kind, k, noise_pct, seed)?;
    let cfg = SolverConfig::new(variant).with_seed(seed).with_noise_level(noise_pct);
    let r = solve(&p.theta, &p.y, &cfg).map_err(js_err)?;
    Ok(Reconstruction {
        recon_error: reconstruction_error(&r.x_hat, &x).map_err(js_err)?,
        original: x.as_slice().to_vec(),
        estimate: r.x_hat.as_slice().to_vec(),
        error_bars: r.error_bars,
        model_size: r.active_set.len(),
        sigma2: r.sigma2_final,
    })
}

/// Zero every Haar coefficient of `values` smaller than `tau` in magnitude.
/// The result holds the denoised signal followed by one extra entry, the
/// number of coefficients that survived.
#[wasm_bindgen(js_name = haarDenoise)]
pub fn haar_denoise(values: Vec<f64>, tau: f64) -> Result<Vec<f64>, JsError> {
    let psi = Basis::new(BasisKind::Haar, values.len()).map_err(js_err)?;
    let w = SparseCoefficients::new(psi.analyze(&values).map_err(js_err)?, BasisKind::Haar).map_err(js_err)?;
    let (kept, _) = signalgen::hard_threshold(&w, tau).map_err(js_err)?;
    let survivors = kept.len() - count_below(&kept, f64::MIN_POSITIVE);
    let mut out = psi.synthesize(kept.values.as_slice()).map_err(js_err)?;
    out.push(survivors as f64);
    Ok(out)
}

/// Fit the spike problem with the SO* variant, then evaluate the log evidence
/// of the fitted prior precisions at `points` log-spaced noise variances
/// spanning six decades either side of the fitted one. Returns interleaved
/// `[sigma2, log_evidence, ...]` pairs.
#[wasm_bindgen(js_name = evidenceProfile)]
pub fn evidence_profile(
    n: usize,
    spikes: usize,
    k: usize,
    noise_pct: f64,
    seed: u64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let (_, p) = spike_problem(n, spikes, "uniform", k, noise_pct, seed)?;
    let cfg = SolverConfig::new(Variant::SoStar).with_seed(seed).with_noise_level(noise_pct);
    let r = solve(&p.theta, &p.y, &cfg).map_err(js_err)?;
    let centre = r.sigma2_final.log10();
    let points = points.max(2);
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let s2 = 10f64.powf(centre - 6.0 + 12.0 * i as f64 / (points - 1) as f64);
        let state = HyperState::new(r.active_set.clone(), r.alpha.clone(), s2).map_err(js_err)?;
        out.push(s2);
        out.push(log_evidence(&p.theta, &p.y, &state, false).map_err(js_err)?);
    }
    Ok(out)
}
