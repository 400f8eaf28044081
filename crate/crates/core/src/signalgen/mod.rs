//! Synthetic signals, Gaussian projections, compressed measurements and the
//! orthonormal bases (identity and Haar) the signals are sparse in.

pub mod haar;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::rng;

/// A length-N real time series (or coefficient vector in the identity basis).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: DVector<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(values))
    }

    pub fn from_vector(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("signal must have at least one sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("signal values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: DVector::zeros(n.max(1)),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Identity,
    Haar,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Identity => "identity",
            BasisKind::Haar => "haar",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = crate::BcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "id" => Ok(BasisKind::Identity),
            "haar" | "db1" => Ok(BasisKind::Haar),
            other => Err(invalid(format!("unknown basis '{other}'"))),
        }
    }
}

/// An N x N orthonormal basis `Psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    kind: BasisKind,
    dim: usize,
}

impl Basis {
    pub fn new(kind: BasisKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("basis dimension must be positive"));
        }
        if kind == BasisKind::Haar {
            haar::check_len(dim)?;
        }
        Ok(Self { kind, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kind: BasisKind::Identity,
            dim: dim.max(1),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense `Psi`. Verification only; the transforms never build it.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        match self.kind {
            BasisKind::Identity => Ok(DMatrix::identity(self.dim, self.dim)),
            BasisKind::Haar => haar::dense_matrix(self.dim),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.dim {
            return Err(invalid(format!(
                "length {n} does not match basis dimension {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// `Psi^T x` on a raw slice.
    pub fn analyze(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x.len())?;
        match self.kind {
            BasisKind::Identity => Ok(x.to_vec()),
            BasisKind::Haar => haar::forward(x),
        }
    }

    /// `Psi w` on a raw slice.
    pub fn synthesize(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check(w.len())?;
        match self.kind {
            BasisKind::Identity => Ok(w.to_vec()),
            BasisKind::Haar => haar::inverse(w),
        }
    }
}

/// Coefficients `w` of a signal in some basis, `x = Psi w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients {
    pub values: DVector<f64>,
    pub basis: BasisKind,
}

impl SparseCoefficients {
    pub fn new(values: Vec<f64>, basis: BasisKind) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        Ok(Self {
            values: DVector::from_vec(values),
            basis,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Gaussian projection matrix `Phi` (K x N) together with the seed that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub entries: DMatrix<f64>,
    pub seed: u64,
}

impl ProjectionMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Compressed data `y = Phi x + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub values: DVector<f64>,
    pub noise_pct: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpikeKind {
    /// Amplitudes are +1 or -1 with equal probability.
    Uniform,
    /// Amplitudes drawn from N(0, 1).
    Gaussian,
}

impl SpikeKind {
    pub fn name(self) -> &'static str {
        match self {
            SpikeKind::Uniform => "uniform",
            SpikeKind::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for SpikeKind {
    type Err = crate::BcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SpikeKind::Uniform),
            "gaussian" | "nonuniform" | "non-uniform" => Ok(SpikeKind::Gaussian),
            other => Err(invalid(format!("unknown spike kind '{other}'"))),
        }
    }
}

/// Spike train with exactly `n_spikes` nonzeros at distinct uniformly chosen
/// positions.
pub fn gen_spikes(n_len: usize, n_spikes: usize, kind: SpikeKind, seed: u64) -> Result<Signal> {
    if n_len == 0 {
        return Err(invalid("signal length must be positive"));
    }
    if n_spikes > n_len {
        return Err(invalid(format!(
            "cannot place {n_spikes} spikes in a signal of length {n_len}"
        )));
    }
    let mut rng = rng::stream(seed, "spikes", 0);
    // partial Fisher-Yates: the first n_spikes slots are a uniform draw without replacement
    let mut idx: Vec<usize> = (0..n_len).collect();
    for i in 0..n_spikes {
        let j = rng.random_range(i..n_len);
        idx.swap(i, j);
    }
    let mut values = vec![0.0; n_len];
    for &pos in &idx[..n_spikes] {
        values[pos] = match kind {
            SpikeKind::Uniform => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            SpikeKind::Gaussian => loop {
                let v: f64 = rng.sample(StandardNormal);
                if v != 0.0 {
                    break v;
                }
            },
        };
    }
    Signal::new(values)
}

/// K x N matrix of independent standard normal draws.
pub fn gen_projection(k: usize, n_len: usize, seed: u64) -> Result<ProjectionMatrix> {
    if k == 0 || n_len == 0 {
        return Err(invalid(format!("projection shape {k}x{n_len} must be positive")));
    }
    let mut rng = rng::stream(seed, "projection", 0);
    let data: Vec<f64> = (0..k * n_len).map(|_| rng.sample(StandardNormal)).collect();
    Ok(ProjectionMatrix {
        entries: DMatrix::from_row_slice(k, n_len, &data),
        seed,
    })
}

pub fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// `y = Phi x + r`, with `r ~ N(0, (noise_pct * RMS(Phi x))^2 I)`.
pub fn compress(
    phi: &ProjectionMatrix,
    x: &Signal,
    noise_pct: f64,
    seed: u64,
) -> Result<Measurements> {
    if phi.cols() != x.len() {
        return Err(invalid(format!(
            "projection has {} columns but signal has length {}",
            phi.cols(),
            x.len()
        )));
    }
    if !noise_pct.is_finite() || noise_pct < 0.0 {
        return Err(invalid(format!("noise fraction {noise_pct} must be >= 0")));
    }
    let mut y = &phi.entries * x.values();
    if noise_pct > 0.0 {
        let std = noise_pct * rms(y.as_slice());
        let mut rng = rng::stream(seed, "noise", 0);
        for v in y.iter_mut() {
            let r: f64 = rng.sample(StandardNormal);
            *v += std * r;
        }
    }
    Ok(Measurements {
        values: y,
        noise_pct,
        seed,
    })
}

pub fn basis_forward(psi: &Basis, x: &Signal) -> Result<SparseCoefficients> {
    let w = psi.analyze(x.as_slice())?;
    SparseCoefficients::new(w, psi.kind())
}

pub fn basis_inverse(psi: &Basis, w: &SparseCoefficients) -> Result<Signal> {
    Signal::new(psi.synthesize(w.values.as_slice())?)
}

/// Zero every coefficient with `|w_i| < tau`; also returns how many survive.
pub fn hard_threshold(w: &SparseCoefficients, tau: f64) -> Result<(SparseCoefficients, usize)> {
    if !(tau > 0.0) {
        return Err(invalid(format!("threshold {tau} must be positive")));
    }
    let values = w.values.map(|v| if v.abs() < tau { 0.0 } else { v });
    let survivors = values.iter().filter(|v| **v != 0.0).count();
    Ok((
        SparseCoefficients {
            values,
            basis: w.basis,
        },
        survivors,
    ))
}

/// `Theta = Phi Psi`. Row k of `Theta` is `Psi^T` applied to row k of `Phi`.
pub fn design_matrix(phi: &ProjectionMatrix, psi: &Basis) -> Result<DMatrix<f64>> {
    if phi.cols() != psi.dim() {
        return Err(invalid(format!(
            "projection has {} columns but basis dimension is {}",
            phi.cols(),
            psi.dim()
        )));
    }
    match psi.kind() {
        BasisKind::Identity => Ok(phi.entries.clone()),
        BasisKind::Haar => {
            let (k, n) = phi.entries.shape();
            let mut theta = DMatrix::zeros(k, n);
            let mut row = vec![0.0; n];
            for r in 0..k {
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = phi.entries[(r, c)];
                }
                let t = haar::forward(&row)?;
                for (c, v) in t.into_iter().enumerate() {
                    theta[(r, c)] = v;
                }
            }
            Ok(theta)
        }
    }
}
