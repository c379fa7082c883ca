//! Deliberately naive references: permutation-expansion determinants and
//! plain long-horizon summation. They share no code path with the product
//! formulas or the certified truncation they are used to check.

use num_complex::Complex64;

use crate::constants::{self, ConstantResult};
use crate::error::{Result, UlamError};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::vandermonde::VandermondeData;

/// Factorial blowup makes anything past order 8 pointless.
pub const HARD_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub max_order: usize,
    /// Reference horizon as a multiple of the main computation's term count.
    pub ref_factor: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_order: 6,
            ref_factor: 4,
        }
    }
}

impl OracleConfig {
    pub fn new(max_order: usize, ref_factor: usize) -> Result<Self> {
        if max_order > HARD_MAX_ORDER {
            return Err(UlamError::TooLarge {
                order: max_order,
                max: HARD_MAX_ORDER,
            });
        }
        Ok(Self {
            max_order,
            ref_factor,
        })
    }
}

/// Heap's algorithm: calls `visit(perm, sign)` for every permutation of 0..n.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize], f64)) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut sign = 1.0;
    visit(&perm, sign);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            visit(&perm, sign);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Leibniz expansion of a square matrix given as rows.
pub fn det_bruteforce(matrix: &[Vec<Complex64>], cfg: &OracleConfig) -> Result<Complex64> {
    let n = matrix.len();
    if n > cfg.max_order.min(HARD_MAX_ORDER) {
        return Err(UlamError::TooLarge {
            order: n,
            max: cfg.max_order.min(HARD_MAX_ORDER),
        });
    }
    if let Some(row) = matrix.iter().find(|row| row.len() != n) {
        return Err(UlamError::DimensionMismatch {
            expected: n,
            got: row.len(),
        });
    }
    let mut acc = ComplexSum::new();
    for_each_permutation(n, |perm, sign| {
        let term = perm
            .iter()
            .enumerate()
            .fold(Complex64::new(sign, 0.0), |t, (row, &col)| {
                t * matrix[row][col]
            });
        acc.add(term);
    });
    Ok(acc.value())
}

/// Rows `(1, r_k, r_k^2, ..., r_k^{p-1})`.
pub fn vandermonde_matrix(nodes: &[Complex64]) -> Vec<Vec<Complex64>> {
    nodes
        .iter()
        .map(|r| (0..nodes.len()).map(|j| r.powi(j as i32)).collect())
        .collect()
}

/// `(1/|V|) sum_{s=1}^{terms} |E_s|`, term by term.
pub fn reference_sum(data: &VandermondeData, terms: usize) -> f64 {
    let mut total = NeumaierSum::new();
    // r_k^{-s} by repeated division, independent of powi
    let mut powers = vec![Complex64::new(1.0, 0.0); data.order()];
    for _ in 1..=terms {
        let mut e = ComplexSum::new();
        for (k, (v, r)) in data.reduced.iter().zip(&data.roots).enumerate() {
            powers[k] /= r;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            e.add(v * powers[k] * sign);
        }
        total.add(e.value().norm());
    }
    total.value() / data.det.norm()
}

/// Summary of the `--verify` cross-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Relative difference between product-formula V and the brute-force determinant.
    pub det_rel_error: f64,
    /// Worst relative difference over the reduced determinants V_k.
    pub reduced_rel_error: f64,
    /// Reference partial sum at the constant's own term count.
    pub reference: f64,
    /// Reference partial sum at `ref_factor` times that count.
    pub reference_long: f64,
    /// Whether the certified interval contains both reference values.
    pub bracketed: bool,
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Cross-checks the determinants and (when given) a best-constant result.
pub fn cross_check(
    data: &VandermondeData,
    best: Option<&ConstantResult>,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let det = det_bruteforce(&vandermonde_matrix(&data.roots), cfg)?;
    let det_rel_error = rel_err(data.det, det);
    let mut reduced_rel_error = 0.0_f64;
    for k in 0..data.order() {
        let rest: Vec<Complex64> = data
            .roots
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &r)| r)
            .collect();
        let vk = det_bruteforce(&vandermonde_matrix(&rest), cfg)?;
        reduced_rel_error = reduced_rel_error.max(rel_err(data.reduced[k], vk));
    }
    let (reference, reference_long, bracketed) = match best {
        Some(kr) => {
            let terms = kr.terms_used.max(1);
            let short = reference_sum(data, terms);
            let long = reference_sum(data, terms * cfg.ref_factor.max(1));
            let slack = 1e-12 * kr.upper().max(1.0);
            let inside = |x: f64| x >= kr.value - slack && x <= kr.upper() + slack;
            (short, long, inside(short) && inside(long))
        }
        None => (f64::NAN, f64::NAN, true),
    };
    Ok(OracleReport {
        det_rel_error,
        reduced_rel_error,
        reference,
        reference_long,
        bracketed,
    })
}

/// Convenience used by tests and `--verify`: reference value at a long horizon
/// next to the certified tail at the same point.
pub fn reference_with_tail(data: &VandermondeData, terms: usize) -> Result<(f64, f64)> {
    let tail = constants::tail_bound_for(data, terms)?;
    Ok((reference_sum(data, terms), tail))
}
