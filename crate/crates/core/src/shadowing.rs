//! Reconstruction of the exact solution that shadows an approximate one.
//!
//! For an approximate trajectory x with residuals f (all roots outside the
//! unit disc) the unique exact solution within `K_R * eps` is
//!
//! ```text
//! y_n = x_n - (-1)^p / V * sum_{s>=1} E_s f_{n+s-1}.
//! ```
//!
//! Only `f_0..f_{N-p-1}` are observable, so the sum at index n stops after
//! `S_n = N - p - n` terms. The result is the exact shadow of the trajectory
//! continued with zero forcing; the distance to the shadow of any continuation
//! with `||f|| <= eps` is at most `cert_error[n]`.

use num_complex::Complex64;

use crate::constants::{tail_bound_for, ConstantResult};
use crate::error::{Result, UlamError};
use crate::recurrence::{residuals, Field, RecurrenceSpec, RootSet};
use crate::series::{Norm, Series, Trajectory};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::vandermonde::{
    cofactor_weights, e_terms, particular_solution, solve_vandermonde, VandermondeData,
};

/// Multiplier on machine epsilon used in the first-order rounding estimates.
const ROUNDING_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowResult {
    pub shadow: Trajectory,
    /// `C̄_1..C̄_p` of the returned shadow, `y_n = sum_k C̄_k r_k^n`.
    pub coefficients: Series,
    pub eps: f64,
    /// `K_R * eps`, using the upper end of the certified interval for K_R.
    pub bound: f64,
    pub cert_error: Vec<f64>,
    /// First-order estimate of floating-point error in `y_n`.
    pub rounding: Vec<f64>,
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
}

impl ShadowResult {
    pub fn max_cert_error(&self) -> f64 {
        self.cert_error.iter().copied().fold(0.0, f64::max)
    }
}

fn require_length(spec: &RecurrenceSpec, traj: &Trajectory) -> Result<()> {
    let p = spec.order();
    if traj.len() <= p {
        return Err(UlamError::InvalidLength {
            needed: p + 1,
            got: traj.len(),
        });
    }
    Ok(())
}

fn deviations(x: &Series, y: &Series, norm: Norm) -> Vec<f64> {
    x.points()
        .zip(y.points())
        .map(|(a, b)| {
            let diff: Vec<Complex64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
            norm.eval(&diff)
        })
        .collect()
}

/// The authoritative shadow: a correction series per index.
pub fn shadow_direct(
    spec: &RecurrenceSpec,
    roots: &RootSet,
    data: &VandermondeData,
    traj: &Trajectory,
    kr: &ConstantResult,
) -> Result<ShadowResult> {
    roots.require_outside()?;
    require_length(spec, traj)?;
    let p = spec.order();
    let n_len = traj.len();
    let d = spec.dim();
    let f = residuals(spec, traj)?;
    let horizon = f.len();

    // g_s = (-1)^p E_s / V, s = 1..horizon
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let g: Vec<Complex64> = e_terms(data, horizon)
        .into_iter()
        .map(|e| e * sign / data.det)
        .collect();

    let mut y = Series::zeros(d, n_len);
    let mut cert_error = Vec::with_capacity(n_len);
    let mut rounding = Vec::with_capacity(n_len);
    for n in 0..n_len {
        let terms = horizon.saturating_sub(n);
        let x_n = traj.get(n);
        let mut magnitude = NeumaierSum::new();
        for s in 1..=terms {
            magnitude.add(g[s - 1].norm() * spec.norm().eval(f.get(n + s - 1)));
        }
        let y_n = y.get_mut(n);
        for c in 0..d {
            let mut acc = ComplexSum::new();
            for s in 1..=terms {
                acc.add(g[s - 1] * f.get(n + s - 1)[c]);
            }
            y_n[c] = x_n[c] - acc.value();
        }
        cert_error.push(f.eps * tail_bound_for(data, terms)?);
        rounding.push(ROUNDING_FACTOR * f64::EPSILON * (spec.norm().eval(x_n) + magnitude.value()));
    }
    if spec.field() == Field::Real {
        y = y.real_part();
    }

    let head = y.truncated(p);
    let coefficients = solve_vandermonde(roots, &head)?.coefficients;
    let deviation = deviations(&traj.values, &y, spec.norm());
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    Ok(ShadowResult {
        shadow: Trajectory::new(y),
        coefficients,
        eps: f.eps,
        bound: kr.upper() * f.eps,
        cert_error,
        rounding,
        deviation,
        max_deviation,
    })
}

/// Closed-form representation of the shadow obtained through the
/// coefficients `C̄_k = C_k + (-1)^{p+k} V_k/V sum_s f_{s-1} / r_k^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientShadow {
    /// `C_1..C_p` of the decomposition `x = sum_k C_k r_k^n + x^(P)`.
    pub base: Series,
    /// `C̄_1..C̄_p`.
    pub coefficients: Series,
    /// `sum_k C̄_k r_k^n` for n = 0..N-1.
    pub shadow: Series,
    pub eps: f64,
    pub cert_error: Vec<f64>,
    pub rounding: Vec<f64>,
    pub solve_residual: f64,
}

/// Largest row sum of |V^{-1}| bound (Gautschi) for nodes `x`.
fn inverse_norm_bound(x: &[Complex64]) -> f64 {
    (0..x.len())
        .map(|k| {
            (0..x.len())
                .filter(|&j| j != k)
                .map(|j| (1.0 + x[j].norm()) / (x[k] - x[j]).norm())
                .product::<f64>()
        })
        .fold(0.0, f64::max)
}

pub fn shadow_coefficients(
    spec: &RecurrenceSpec,
    roots: &RootSet,
    data: &VandermondeData,
    traj: &Trajectory,
) -> Result<CoefficientShadow> {
    roots.require_outside()?;
    require_length(spec, traj)?;
    let p = spec.order();
    let d = spec.dim();
    let norm = spec.norm();
    let f = residuals(spec, traj)?;
    let horizon = f.len();

    let mut rhs = Series::zeros(d, p);
    let mut rhs_scale = 0.0_f64;
    for n in 0..p {
        let xp = particular_solution(data, &f, n)?;
        let x_n = traj.get(n);
        rhs_scale = rhs_scale.max(norm.eval(x_n) + norm.eval(&xp));
        for (c, slot) in rhs.get_mut(n).iter_mut().enumerate() {
            *slot = x_n[c] - xp[c];
        }
    }
    let solve = solve_vandermonde(roots, &rhs)?;
    if solve.ill_conditioned {
        return Err(UlamError::IllConditioned {
            residual: solve.residual,
        });
    }
    let base = solve.coefficients;

    let weights = cofactor_weights(data);
    let eps_m = f64::EPSILON;
    let solve_err =
        ROUNDING_FACTOR * eps_m * p as f64 * inverse_norm_bound(&roots.roots) * rhs_scale;
    let mut coefficients = Series::zeros(d, p);
    let mut coeff_err = Vec::with_capacity(p);
    for k in 0..p {
        let r = roots.roots[k];
        let inv = r.inv();
        let mut magnitude = NeumaierSum::new();
        let mut power = Complex64::new(1.0, 0.0);
        let mut sums: Vec<ComplexSum> = vec![ComplexSum::new(); d];
        for s in 1..=horizon {
            power *= inv;
            let fs = f.get(s - 1);
            for c in 0..d {
                sums[c].add(fs[c] * power);
            }
            magnitude.add(norm.eval(fs) * power.norm());
        }
        let row = coefficients.get_mut(k);
        for c in 0..d {
            row[c] = base.get(k)[c] + weights[k] * sums[c].value();
        }
        let corr_scale = weights[k].norm() * magnitude.value();
        coeff_err.push(
            solve_err
                + ROUNDING_FACTOR * eps_m * corr_scale
                + eps_m * (norm.eval(base.get(k)) + corr_scale),
        );
    }

    let n_len = traj.len();
    let mut shadow = Series::zeros(d, n_len);
    let mut cert_error = Vec::with_capacity(n_len);
    let mut rounding = Vec::with_capacity(n_len);
    for n in 0..n_len {
        let mut cert = NeumaierSum::new();
        let mut round = NeumaierSum::new();
        let y_n = shadow.get_mut(n);
        let mut accs = vec![ComplexSum::new(); d];
        for k in 0..p {
            let r = roots.roots[k];
            let m = r.norm();
            let rn = r.powi(n as i32);
            for c in 0..d {
                accs[c].add(coefficients.get(k)[c] * rn);
            }
            // unknown forcing beyond the horizon: |w_k| eps sum_{s>M} |r_k|^{n-s}
            cert.add(weights[k].norm() * f.eps * m.powi(n as i32 - horizon as i32) / (m - 1.0));
            let mag = m.powi(n as i32);
            round.add(
                mag * (coeff_err[k]
                    + ROUNDING_FACTOR * eps_m * (n as f64 + 1.0) * norm.eval(coefficients.get(k))),
            );
        }
        for c in 0..d {
            y_n[c] = accs[c].value();
        }
        cert_error.push(cert.value());
        rounding.push(round.value());
    }
    if spec.field() == Field::Real {
        shadow = shadow.real_part();
    }

    Ok(CoefficientShadow {
        base,
        coefficients,
        shadow,
        eps: f.eps,
        cert_error,
        rounding,
        solve_residual: solve.residual,
    })
}

/// Pointwise comparison of the two shadow constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComparison {
    pub max_gap: f64,
    /// Largest `gap_n - allowance_n`; at most zero when the paths agree.
    pub worst_excess: f64,
    pub agree: bool,
}

/// Checks `||y_direct - y_coeff|| <= cert + rounding` of both paths at every index.
pub fn compare_paths(
    direct: &ShadowResult,
    coeff: &CoefficientShadow,
    norm: Norm,
) -> PathComparison {
    let gaps = deviations(&direct.shadow.values, &coeff.shadow, norm);
    let mut max_gap = 0.0_f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for (n, gap) in gaps.iter().enumerate() {
        let allowance =
            direct.cert_error[n] + coeff.cert_error[n] + direct.rounding[n] + coeff.rounding[n];
        max_gap = max_gap.max(*gap);
        worst_excess = worst_excess.max(gap - allowance);
    }
    PathComparison {
        max_gap,
        worst_excess,
        agree: worst_excess <= 0.0 && gaps.len() == direct.shadow.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Bound on the homogeneous residual of y, relative to 1 + max ||y_n||.
    pub res_tol: f64,
    /// Absolute slack added to `bound + max cert_error`.
    pub dev_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            res_tol: 1e-9,
            dev_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Homogeneous residual of the shadow, relative to 1 + max ||y_n||.
    pub residual: f64,
    pub max_deviation: f64,
    pub bound: f64,
    pub cert_error_max: f64,
    pub residual_ok: bool,
    pub deviation_ok: bool,
    pub pass: bool,
}

/// Re-measures a shadow against its trajectory; failures are reported, not raised.
pub fn verify_shadow(
    spec: &RecurrenceSpec,
    traj: &Trajectory,
    result: &ShadowResult,
    cfg: &VerifyConfig,
) -> VerificationReport {
    let y = &result.shadow;
    let residual = if y.len() == traj.len() {
        match residuals(spec, y) {
            Ok(h) => h.eps / (1.0 + y.values.max_norm(spec.norm())),
            Err(_) => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };
    let max_deviation = if y.len() == traj.len() {
        deviations(&traj.values, &y.values, spec.norm())
            .into_iter()
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let cert_error_max = result.max_cert_error();
    let residual_ok = residual <= cfg.res_tol;
    let deviation_ok = max_deviation <= result.bound + cert_error_max + cfg.dev_tol;
    VerificationReport {
        residual,
        max_deviation,
        bound: result.bound,
        cert_error_max,
        residual_ok,
        deviation_ok,
        pass: residual_ok && deviation_ok,
    }
}
