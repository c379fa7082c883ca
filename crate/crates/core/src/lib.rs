//! Ulam stability of linear difference equations with constant coefficients.
//!
//! For `x_{n+p} = a_1 x_{n+p-1} + ... + a_p x_n` with distinct characteristic
//! roots outside the unit disc, every eps-approximate solution has a unique
//! exact solution within `K_R * eps`, where
//!
//! ```text
//! K_R = 1/|V| * sum_{s>=1} | V_1/r_1^s - V_2/r_2^s + ... + (-1)^{p+1} V_p/r_p^s |
//! ```
//!
//! and `V`, `V_k` are Vandermonde determinants of the roots. This crate
//! computes that constant as a certified truncated series, reconstructs the
//! shadow solution of a finite approximate trajectory, and builds the
//! perturbation that attains `K_R`.

pub mod adversary;
pub mod constants;
pub mod error;
pub mod io;
pub mod oracle;
pub mod poly;
pub mod recurrence;
pub mod series;
pub mod shadowing;
pub mod sum;
pub mod vandermonde;

pub use error::{Result, UlamError};
pub use num_complex::Complex64;
pub use recurrence::{
    characteristic_roots, classify_roots, residuals, simulate, Field, RecurrenceSpec, RootConfig,
    RootSet, SpectralClass, ToleranceConfig,
};
pub use series::{Forcing, Norm, Series, Trajectory};
