//! Vandermonde determinants of the characteristic roots and the quantities
//! built from them.
//!
//! `V = prod_{i<j} (r_j - r_i)` and `V_k` is the same product with `r_k`
//! left out. The series terms
//!
//! ```text
//! E_s = V_1/r_1^s - V_2/r_2^s + ... + (-1)^{p+1} V_p/r_p^s
//! ```
//!
//! drive both the best Ulam constant and the shadow construction. Nothing
//! here ever forms the p x p Vandermonde matrix; the product formulas give the
//! determinants and cofactors directly.

use num_complex::Complex64;

use crate::error::{Result, UlamError};
use crate::recurrence::RootSet;
use crate::series::{Forcing, Norm, Series};
use crate::sum::{ComplexSum, NeumaierSum};

/// `V`, the reduced determinants `V_1..V_p`, and the roots they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeData {
    pub det: Complex64,
    pub reduced: Vec<Complex64>,
    pub roots: Vec<Complex64>,
}

/// One term `E_s` of the alternating series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ETerm {
    pub s: usize,
    pub value: Complex64,
    pub magnitude: f64,
}

/// `prod_{i<j} (r_j - r_i)`; 1 for fewer than two nodes.
pub fn product_determinant(nodes: &[Complex64]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for j in 0..nodes.len() {
        for i in 0..j {
            det *= nodes[j] - nodes[i];
        }
    }
    det
}

impl VandermondeData {
    pub fn build(roots: &RootSet) -> Result<Self> {
        if roots.near_degenerate {
            return Err(UlamError::DegenerateRoots {
                separation: roots.min_separation,
            });
        }
        Ok(Self::from_nodes(&roots.roots))
    }

    /// Unchecked construction from raw nodes; `det` is zero for repeated nodes.
    pub fn from_nodes(nodes: &[Complex64]) -> Self {
        let det = product_determinant(nodes);
        let reduced = (0..nodes.len())
            .map(|k| {
                let rest: Vec<Complex64> = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &r)| r)
                    .collect();
                product_determinant(&rest)
            })
            .collect();
        Self {
            det,
            reduced,
            roots: nodes.to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.roots.len()
    }

    /// `(-1)^{k+1} V_k` for k = 1..p, i.e. the signs inside `E_s`.
    pub(crate) fn alternating(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.reduced
            .iter()
            .enumerate()
            .map(|(k, &v)| if k % 2 == 0 { v } else { -v })
    }

    /// `sum_k |V_k| / |r_k|^s`: the size of the terms that cancel inside `E_s`.
    pub fn e_scale(&self, s: usize) -> f64 {
        let mut acc = NeumaierSum::new();
        for (v, r) in self.reduced.iter().zip(&self.roots) {
            acc.add(v.norm() * r.norm().powi(-(s as i32)));
        }
        acc.value()
    }
}

pub fn build(roots: &RootSet) -> Result<VandermondeData> {
    VandermondeData::build(roots)
}

/// `E_s` for s >= 1 (s = 0 is accepted and gives the plain alternating sum
/// of the `V_k`).
pub fn e_term(data: &VandermondeData, s: usize) -> ETerm {
    let exp = -(s as i32);
    let value: Complex64 = data
        .alternating()
        .zip(&data.roots)
        .map(|(v, r)| v * r.powi(exp))
        .collect::<ComplexSum>()
        .value();
    ETerm {
        s,
        value,
        magnitude: value.norm(),
    }
}

/// `E_1..E_count` (index 0 of the result holds `E_1`).
pub fn e_terms(data: &VandermondeData, count: usize) -> Vec<Complex64> {
    (1..=count).map(|s| e_term(data, s).value).collect()
}

/// Result of [`solve_vandermonde`].
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSolve {
    /// `C_1..C_p`, each a point of the value space.
    pub coefficients: Series,
    /// max_n ||sum_k C_k r_k^n - rhs_n|| / max_n ||rhs_n||.
    pub residual: f64,
    pub ill_conditioned: bool,
}

/// Relative residual above which a solve is reported as ill-conditioned.
pub const ILL_CONDITIONED_RESIDUAL: f64 = 1e-8;

/// Finds `C_1..C_p` with `sum_k C_k r_k^n = rhs_n` for n = 0..p-1.
///
/// Björck–Pereyra elimination, O(p^2) per component, applied coordinatewise.
pub fn solve_vandermonde(roots: &RootSet, rhs: &Series) -> Result<VandermondeSolve> {
    if roots.near_degenerate {
        return Err(UlamError::DegenerateRoots {
            separation: roots.min_separation,
        });
    }
    solve_nodes(&roots.roots, rhs)
}

pub(crate) fn solve_nodes(x: &[Complex64], rhs: &Series) -> Result<VandermondeSolve> {
    let p = x.len();
    if rhs.len() != p {
        return Err(UlamError::InvalidLength {
            needed: p,
            got: rhs.len(),
        });
    }
    let d = rhs.dim();
    let mut out = Series::zeros(d, p);
    let mut b = vec![Complex64::new(0.0, 0.0); p];
    for c in 0..d {
        for (n, slot) in b.iter_mut().enumerate() {
            *slot = rhs.get(n)[c];
        }
        let last = p - 1;
        for k in 0..last {
            for i in (k + 1..=last).rev() {
                let prev = b[i - 1];
                b[i] -= x[k] * prev;
            }
        }
        for k in (0..last).rev() {
            for i in k + 1..=last {
                b[i] /= x[i] - x[i - k - 1];
            }
            for i in k..last {
                let next = b[i + 1];
                b[i] -= next;
            }
        }
        for (k, &v) in b.iter().enumerate() {
            out.get_mut(k)[c] = v;
        }
    }

    let scale = rhs.max_norm(Norm::Sup);
    let mut worst = 0.0_f64;
    let mut row = vec![Complex64::new(0.0, 0.0); d];
    for n in 0..p {
        for (c, slot) in row.iter_mut().enumerate() {
            let mut acc = ComplexSum::new();
            for (k, r) in x.iter().enumerate() {
                acc.add(out.get(k)[c] * r.powi(n as i32));
            }
            acc.add(-rhs.get(n)[c]);
            *slot = acc.value();
        }
        worst = worst.max(Norm::Sup.eval(&row));
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    Ok(VandermondeSolve {
        coefficients: out,
        residual,
        ill_conditioned: residual > ILL_CONDITIONED_RESIDUAL,
    })
}

/// Weights `(-1)^{p+k} V_k / V`, k = 1..p.
pub(crate) fn cofactor_weights(data: &VandermondeData) -> Vec<Complex64> {
    let p = data.order();
    data.reduced
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            // (-1)^{p+k} with k 1-based
            let sign = if (p + k + 1) % 2 == 0 { 1.0 } else { -1.0 };
            v * sign / data.det
        })
        .collect()
}

/// Variation-of-parameters particular solution at index n:
///
/// ```text
/// x_n^(P) = 1/V sum_{s=1}^{n} ( sum_k (-1)^{p+k} V_k r_k^{n-s} ) f_{s-1}
/// ```
pub fn particular_solution(
    data: &VandermondeData,
    forcing: &Forcing,
    n: usize,
) -> Result<Vec<Complex64>> {
    if forcing.len() < n {
        return Err(UlamError::MissingForcing {
            needed: n,
            got: forcing.len(),
        });
    }
    let weights = cofactor_weights(data);
    // kernel[j] = sum_k w_k r_k^j
    let kernel: Vec<Complex64> = (0..n)
        .map(|j| {
            weights
                .iter()
                .zip(&data.roots)
                .map(|(w, r)| w * r.powi(j as i32))
                .collect::<ComplexSum>()
                .value()
        })
        .collect();
    let d = forcing.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut acc = ComplexSum::new();
        for s in 1..=n {
            acc.add(kernel[n - s] * forcing.get(s - 1)[c]);
        }
        *slot = acc.value();
    }
    Ok(out)
}

/// `x_0^(P) .. x_{len-1}^(P)` as a sequence.
pub fn particular_sequence(
    data: &VandermondeData,
    forcing: &Forcing,
    len: usize,
) -> Result<Series> {
    let mut out = Series::zeros(forcing.dim(), 0);
    for n in 0..len {
        out.push(&particular_solution(data, forcing, n)?);
    }
    Ok(out)
}
