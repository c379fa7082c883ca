//! The perturbation that attains the best constant.
//!
//! With `f_n = (|E_n| / E_n) u eps` (zero where `E_n` vanishes) the bounded
//! solution of the forced equation has `x_1 = (-1)^p/V u eps sum_s |E_s|`, so
//! `||x_1|| = eps K_R` while the only exact solution staying within a bounded
//! distance of x is the zero solution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{tail_bound_for, terms_for_budget, ConstantResult, MAX_TERMS};
use crate::error::{Result, UlamError};
use crate::recurrence::{RecurrenceSpec, RootSet};
use crate::series::{Forcing, Norm, Series, Trajectory};
use crate::shadowing::shadow_coefficients;
use crate::sum::ComplexSum;
use crate::vandermonde::{e_term, VandermondeData};

/// `|E_n|` at or below this fraction of `sum_k |V_k| / |r_k|^n` counts as an
/// exact zero (cancellation residue).
pub const ZERO_GUARD: f64 = 1e-14;

/// First standard basis vector of the d-dimensional value space.
pub fn default_direction(dim: usize) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); dim];
    u[0] = Complex64::new(1.0, 0.0);
    u
}

/// Unit-modulus `|E| / E`, or `None` on the zero branch.
fn phase(data: &VandermondeData, n: usize) -> Option<Complex64> {
    let e = e_term(data, n);
    if e.magnitude <= ZERO_GUARD * data.e_scale(n) {
        return None;
    }
    let z = e.value.conj() / e.magnitude;
    Some(z / z.norm())
}

/// `f_0..f_{len-1}` with `f_n = (|E_n|/E_n) u eps`, or 0 where `E_n = 0`.
///
/// Index 0 uses `E_0 = V_1 - V_2 + ...`, which vanishes for p >= 2.
pub fn worst_forcing(
    data: &VandermondeData,
    eps: f64,
    u: &[Complex64],
    norm: Norm,
    len: usize,
) -> Result<Forcing> {
    if !((norm.eval(u) - 1.0).abs() <= 1e-12) {
        return Err(UlamError::InvalidSpec(format!(
            "direction u must have unit norm, got {}",
            norm.eval(u)
        )));
    }
    let d = u.len();
    let mut values = Series::zeros(d, len);
    for n in 0..len {
        let Some(ph) = phase(data, n) else { continue };
        let row = values.get_mut(n);
        for (slot, &uc) in row.iter_mut().zip(u) {
            *slot = ph * uc * eps;
        }
        // keep ||f_n|| <= eps despite rounding in the phase
        let mut size = norm.eval(row);
        while size > eps {
            let shrink = (eps / size) * (1.0 - f64::EPSILON);
            for z in row.iter_mut() {
                *z *= shrink;
            }
            size = norm.eval(row);
        }
    }
    let mut forcing = Forcing::new(values, norm);
    forcing.eps = forcing.eps.min(eps);
    Ok(forcing)
}

/// Bounded solution of the forced equation for the supplied forcing extended
/// by zeros:
///
/// ```text
/// x_n = (-1)^p / V * sum_{s>=1} E_s f_{n+s-1}.
/// ```
///
/// Residuals of the returned trajectory reproduce `f_0..f_{len-p-1}`.
pub fn worst_trajectory(
    spec: &RecurrenceSpec,
    data: &VandermondeData,
    forcing: &Forcing,
    len: usize,
) -> Result<Trajectory> {
    let p = spec.order();
    let needed = len.saturating_sub(p);
    if forcing.len() < needed {
        return Err(UlamError::MissingForcing {
            needed,
            got: forcing.len(),
        });
    }
    let m = forcing.len();
    let d = forcing.dim();
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let g: Vec<Complex64> = (1..=m)
        .map(|s| e_term(data, s).value * sign / data.det)
        .collect();
    let mut x = Series::zeros(d, len);
    for n in 0..len {
        let terms = m.saturating_sub(n);
        let row = x.get_mut(n);
        for (c, slot) in row.iter_mut().enumerate() {
            let mut acc = ComplexSum::new();
            for s in 1..=terms {
                acc.add(g[s - 1] * forcing.get(n + s - 1)[c]);
            }
            *slot = acc.value();
        }
    }
    Ok(Trajectory::new(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    /// `||x_1|| / eps`.
    #[serde(rename = "ratio")]
    pub achieved_ratio: f64,
    #[serde(rename = "kr")]
    pub kr_value: f64,
    pub gap: f64,
    #[serde(rename = "terms")]
    pub horizon: usize,
    #[serde(skip)]
    pub tail_budget: f64,
    /// `sup_n ||x_n|| / eps` over the window.
    #[serde(skip)]
    pub sup_ratio: f64,
    /// Largest shadow coefficient norm of the worst trajectory, divided by eps.
    #[serde(skip)]
    pub shadow_coefficient_norm: f64,
}

/// Builds the worst-case perturbation with a tail budget of `tol * K_R` and
/// measures how much of `K_R` it realises.
pub fn sharpness_experiment(
    spec: &RecurrenceSpec,
    roots: &RootSet,
    data: &VandermondeData,
    kr: &ConstantResult,
    eps: f64,
    tol: f64,
    direction: Option<&[Complex64]>,
) -> Result<SharpnessReport> {
    roots.require_outside()?;
    if !(eps > 0.0) {
        return Err(UlamError::InvalidSpec("eps must be positive".into()));
    }
    let budget = tol * kr.value;
    let terms = terms_for_budget(data, budget, MAX_TERMS)?.ok_or(UlamError::TolUnreachable {
        cap: MAX_TERMS,
        tail: tail_bound_for(data, MAX_TERMS)?,
    })?;
    let default_u;
    let u = match direction {
        Some(u) => u,
        None => {
            default_u = default_direction(spec.dim());
            &default_u
        }
    };
    if u.len() != spec.dim() {
        return Err(UlamError::DimensionMismatch {
            expected: spec.dim(),
            got: u.len(),
        });
    }

    // f_0..f_S feeds x_1 with exactly S terms
    let forcing = worst_forcing(data, eps, u, spec.norm(), terms + 1)?;
    let len = forcing.len() + spec.order();
    let traj = worst_trajectory(spec, data, &forcing, len)?;

    let norm = spec.norm();
    let achieved_ratio = norm.eval(traj.get(1)) / eps;
    let sup_ratio = traj.values.max_norm(norm) / eps;
    let shadow = shadow_coefficients(spec, roots, data, &traj)?;
    let shadow_coefficient_norm = shadow.coefficients.max_norm(norm) / eps;

    Ok(SharpnessReport {
        achieved_ratio,
        kr_value: kr.value,
        gap: kr.value - achieved_ratio,
        horizon: terms,
        tail_budget: tail_bound_for(data, terms)?,
        sup_ratio,
        shadow_coefficient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{best_constant, DEFAULT_TOL};
    use crate::recurrence::{characteristic_roots, residuals, RootConfig};
    use crate::vandermonde::build;

    fn setup(a: &[f64]) -> (RecurrenceSpec, RootSet, VandermondeData, ConstantResult) {
        let spec = RecurrenceSpec::real(a).unwrap();
        let roots = characteristic_roots(&spec, &RootConfig::default()).unwrap();
        let data = build(&roots).unwrap();
        let kr = best_constant(&roots, &data, DEFAULT_TOL).unwrap();
        (spec, roots, data, kr)
    }

    #[test]
    fn positive_terms_give_constant_forcing() {
        let (_, _, data, _) = setup(&[5.0, -6.0]);
        let u = default_direction(1);
        let f = worst_forcing(&data, 0.5, &u, Norm::Sup, 10).unwrap();
        for n in 1..10 {
            assert_eq!(f.get(n)[0], Complex64::new(0.5, 0.0));
        }
        // E_0 = V_1 - V_2 = 0
        assert_eq!(f.get(0)[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn symmetric_roots_zero_even_indices() {
        let (_, _, data, _) = setup(&[0.0, 4.0]);
        let u = default_direction(1);
        let f = worst_forcing(&data, 1.0, &u, Norm::Sup, 12).unwrap();
        for n in 1..12 {
            let want = if n % 2 == 0 { 0.0 } else { 1.0 };
            assert_eq!(f.get(n)[0], Complex64::new(want, 0.0), "n = {n}");
        }
    }

    #[test]
    fn rejects_non_unit_direction() {
        let (_, _, data, _) = setup(&[2.0]);
        let u = vec![Complex64::new(2.0, 0.0)];
        assert!(worst_forcing(&data, 1.0, &u, Norm::Sup, 3).is_err());
    }

    #[test]
    fn zero_forcing_gives_zero_trajectory() {
        let (spec, _, data, _) = setup(&[5.0, -6.0]);
        let t = worst_trajectory(&spec, &data, &Forcing::zeros(1, 10), 8).unwrap();
        assert_eq!(t.values.max_norm(Norm::Sup), 0.0);
    }

    #[test]
    fn worst_trajectory_residuals_match_forcing() {
        let (spec, _, data, _) = setup(&[0.0, 4.0]);
        let f = worst_forcing(&data, 1.0, &default_direction(1), Norm::Sup, 30).unwrap();
        let t = worst_trajectory(&spec, &data, &f, 32).unwrap();
        let r = residuals(&spec, &t).unwrap();
        for n in 0..30 {
            assert!((r.get(n)[0] - f.get(n)[0]).norm() <= 1e-9);
        }
        assert!(matches!(
            worst_trajectory(&spec, &data, &f, 40),
            Err(UlamError::MissingForcing { .. })
        ));
    }

    #[test]
    fn geometric_case_attains_one() {
        let (spec, roots, data, kr) = setup(&[2.0]);
        let rep = sharpness_experiment(&spec, &roots, &data, &kr, 1.0, 0.01, None).unwrap();
        assert!(rep.achieved_ratio >= 0.99 && rep.achieved_ratio <= 1.0);
        assert!(rep.shadow_coefficient_norm <= 1e-8);
    }

    #[test]
    fn report_wire_format() {
        let rep = SharpnessReport {
            achieved_ratio: 0.5,
            kr_value: 0.5,
            gap: 0.0,
            horizon: 7,
            tail_budget: 0.0,
            sup_ratio: 0.5,
            shadow_coefficient_norm: 0.0,
        };
        assert_eq!(
            serde_json::to_string(&rep).unwrap(),
            r#"{"ratio":0.5,"kr":0.5,"gap":0.0,"terms":7}"#
        );
    }
}
