use thiserror::Error;

use crate::recurrence::SpectralClass;

pub type Result<T> = std::result::Result<T, UlamError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UlamError {
    #[error("invalid recurrence spec: {0}")]
    InvalidSpec(String),

    #[error(
        "root refinement did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("sequence too short: need at least {needed} entries, got {got}")]
    InvalidLength { needed: usize, got: usize },

    #[error("characteristic roots are (nearly) repeated: min separation {separation:e}")]
    DegenerateRoots { separation: f64 },

    #[error("equation is not Ulam stable: characteristic root with modulus {modulus} lies on the unit circle")]
    NotUlamStable { modulus: f64 },

    #[error("operation requires all roots outside the unit disc, spectrum is {0:?}")]
    NotApplicable(SpectralClass),

    #[error("tail bound {tail:e} still above tolerance after {cap} terms")]
    TolUnreachable { cap: usize, tail: f64 },

    #[error("forcing too short: need {needed} entries, got {got}")]
    MissingForcing { needed: usize, got: usize },

    #[error("Vandermonde solve is ill-conditioned (relative residual {residual:e})")]
    IllConditioned { residual: f64 },

    #[error("matrix of order {order} exceeds the brute-force limit {max}")]
    TooLarge { order: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
