//! Ulam constants.
//!
//! The classical constant `1 / |prod_k (|r_k| - 1)|` holds whenever no root
//! touches the unit circle. When every root lies outside the unit disc the
//! best constant is the absolutely convergent series
//!
//! ```text
//! K_R = 1/|V| * sum_{s>=1} |E_s|,
//! ```
//!
//! evaluated here as a partial sum plus a geometric majorant of the tail, so
//! the returned interval `[value, value + tail_bound]` contains the limit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UlamError};
use crate::recurrence::{RootSet, SpectralClass};
use crate::sum::NeumaierSum;
use crate::vandermonde::{e_term, VandermondeData};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantKind {
    Classical,
    BestOutside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantResult {
    /// Partial sum; a lower bound for the best constant.
    pub value: f64,
    #[serde(rename = "terms")]
    pub terms_used: usize,
    pub tail_bound: f64,
    pub kind: ConstantKind,
}

impl ConstantResult {
    pub fn lower(&self) -> f64 {
        self.value
    }

    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lower(), self.upper())
    }
}

/// `1 / |prod_k (|r_k| - 1)|`.
pub fn classical_constant(roots: &RootSet) -> Result<ConstantResult> {
    if roots.classification == SpectralClass::OnUnitCircle {
        return Err(UlamError::NotUlamStable {
            modulus: roots.closest_to_unit_circle(),
        });
    }
    let denom: f64 = roots.moduli.iter().map(|m| m - 1.0).product();
    Ok(ConstantResult {
        value: 1.0 / denom.abs(),
        terms_used: 0,
        tail_bound: 0.0,
        kind: ConstantKind::Classical,
    })
}

/// Geometric majorant of `(1/|V|) sum_{s>S} |E_s|`:
/// `(1/|V|) sum_k |V_k| |r_k|^{-S} / (|r_k| - 1)`.
pub fn tail_bound(roots: &RootSet, data: &VandermondeData, terms: usize) -> Result<f64> {
    if roots.moduli.iter().any(|&m| m <= 1.0) {
        return Err(UlamError::NotApplicable(roots.classification));
    }
    tail_bound_for(data, terms)
}

pub(crate) fn tail_bound_for(data: &VandermondeData, terms: usize) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for (v, r) in data.reduced.iter().zip(&data.roots) {
        let m = r.norm();
        if m <= 1.0 {
            return Err(UlamError::NotApplicable(SpectralClass::HyperbolicMixed));
        }
        acc.add(v.norm() * m.powi(-(terms as i32)) / (m - 1.0));
    }
    Ok(acc.value() / data.det.norm())
}

/// Certified best constant with the default term cap.
pub fn best_constant(roots: &RootSet, data: &VandermondeData, tol: f64) -> Result<ConstantResult> {
    best_constant_capped(roots, data, tol, MAX_TERMS)
}

/// Sums `|E_s| / |V|` until the tail majorant drops to `tol`.
pub fn best_constant_capped(
    roots: &RootSet,
    data: &VandermondeData,
    tol: f64,
    max_terms: usize,
) -> Result<ConstantResult> {
    roots.require_outside()?;
    let inv_det = 1.0 / data.det.norm();
    let mut partial = NeumaierSum::new();
    let mut s = 0;
    loop {
        let tail = tail_bound_for(data, s)?;
        if tail <= tol && s >= 1 {
            return Ok(ConstantResult {
                value: partial.value() * inv_det,
                terms_used: s,
                tail_bound: tail,
                kind: ConstantKind::BestOutside,
            });
        }
        if s >= max_terms {
            return Err(UlamError::TolUnreachable {
                cap: max_terms,
                tail,
            });
        }
        s += 1;
        partial.add(e_term(data, s).magnitude);
    }
}

/// Smallest S >= 1 whose tail majorant is at most `budget`, or None past the cap.
pub fn terms_for_budget(
    data: &VandermondeData,
    budget: f64,
    max_terms: usize,
) -> Result<Option<usize>> {
    for s in 1..=max_terms {
        if tail_bound_for(data, s)? <= budget {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// The second- and third-order specialisations of the best constant, written
/// out from the roots alone. Used only to cross-check [`best_constant`].
///
/// Returns `None` unless p is 2 or 3 and every root lies outside the unit
/// disc, or if the tolerance cannot be met within [`MAX_TERMS`].
pub fn closed_form_small_order(roots: &RootSet, tol: f64) -> Option<f64> {
    let r = &roots.roots;
    if !(2..=3).contains(&r.len()) || roots.moduli.iter().any(|&m| m <= 1.0) {
        return None;
    }
    // term_s = sum_k weight_k / r_k^s, scaled by 1/denominator
    let (weights, denominator): (Vec<Complex64>, f64) = if r.len() == 2 {
        (
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            (r[0] - r[1]).norm(),
        )
    } else {
        (
            vec![r[2] - r[1], r[0] - r[2], r[1] - r[0]],
            ((r[2] - r[0]) * (r[2] - r[1]) * (r[1] - r[0])).norm(),
        )
    };
    if denominator == 0.0 {
        return None;
    }
    let tail = |s: usize| -> f64 {
        weights
            .iter()
            .zip(r)
            .map(|(w, root)| {
                let m = root.norm();
                w.norm() * m.powi(-(s as i32)) / (m - 1.0)
            })
            .sum::<f64>()
            / denominator
    };
    let mut acc = NeumaierSum::new();
    let mut inv: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); r.len()];
    for s in 1..=MAX_TERMS {
        let mut term = Complex64::new(0.0, 0.0);
        for k in 0..r.len() {
            inv[k] /= r[k];
            term += weights[k] * inv[k];
        }
        acc.add(term.norm());
        if tail(s) <= tol {
            return Some(acc.value() / denominator);
        }
    }
    None
}
