use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BcsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The posterior precision (or the marginal covariance `C`) could not be
    /// factorized for this active set.
    #[error("ill-conditioned state: factorization failed for active set {active:?}")]
    IllConditioned { active: Vec<usize> },

    /// `alpha_n - S~_n` collapsed for an active term.
    #[error("numerical degeneracy at term {index}: alpha - S = {gap:e}")]
    Degenerate { index: usize, gap: f64 },

    #[error("degenerate noise-variance update: denominator {0:e} is not positive")]
    DegenerateUpdate(f64),
}

pub type Result<T> = std::result::Result<T, BcsError>;

pub(crate) fn invalid(msg: impl Into<String>) -> BcsError {
    BcsError::InvalidArgument(msg.into())
}
