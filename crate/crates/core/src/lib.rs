//! Sparse Bayesian compressive-sensing reconstruction.
//!
//! A length-N signal `x = Psi w`, sparse in an orthonormal basis `Psi`, is
//! observed through `K < N` random projections `y = Phi x + e`. The solvers in
//! [`solvers`] recover `w` together with posterior error bars by maximizing
//! the marginal likelihood of per-coefficient prior precisions.
//!
//! ```
//! use robust_bcs::signalgen::{self, Basis, SpikeKind};
//! use robust_bcs::solvers::{solve, SolverConfig, Variant};
//!
//! let x = signalgen::gen_spikes(64, 3, SpikeKind::Uniform, 1).unwrap();
//! let phi = signalgen::gen_projection(30, 64, 2).unwrap();
//! let y = signalgen::compress(&phi, &x, 0.0, 3).unwrap();
//! let theta = signalgen::design_matrix(&phi, &Basis::identity(64)).unwrap();
//! let r = solve(&theta, &y.values, &SolverConfig::new(Variant::So)).unwrap();
//! assert!(robust_bcs::metrics::reconstruction_error(&r.x_hat, &x).unwrap() < 1e-6);
//! ```

pub mod error;
pub mod metrics;
pub mod oracle;
pub mod posterior;
pub mod rng;
pub mod signalgen;
pub mod solvers;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{BcsError, Result};
