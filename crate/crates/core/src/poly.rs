//! Monic polynomial helpers and the root finder behind
//! [`characteristic_roots`](crate::recurrence::characteristic_roots).
//!
//! Coefficients are stored highest degree first: `c[0] = 1`, `c[p]` is the
//! constant term.

use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Value and derivative of the polynomial at `z` (Horner).
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut q = ZERO;
    let mut dq = ZERO;
    for &c in coeffs {
        dq = dq * z + q;
        q = q * z + c;
    }
    (q, dq)
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().fold(ZERO, |acc, &c| acc * z + c)
}

/// Coefficients of q', highest degree first.
pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len().saturating_sub(1);
    coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (deg - i) as f64)
        .collect()
}

/// Expand prod_k (z - r_k) into monic coefficients.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![ONE];
    for &r in roots {
        c.push(ZERO);
        for i in (1..c.len()).rev() {
            let prev = c[i - 1];
            c[i] -= r * prev;
        }
    }
    c
}

/// Eigenvalues of the companion matrix of a monic polynomial.
fn companion_eigenvalues(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    let p = coeffs.len() - 1;
    let m = DMatrix::from_fn(p, p, |i, j| {
        if i == 0 {
            -coeffs[j + 1]
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let schur = m.try_schur(f64::EPSILON, 10_000)?;
    let eig = schur.eigenvalues()?;
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(eig.iter().copied().collect())
}

/// Starting points spread on a circle of radius max_i |c_i|^{1/i}.
fn circle_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let p = coeffs.len() - 1;
    let radius = coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm().powf(1.0 / (i + 1) as f64))
        .fold(0.0_f64, f64::max)
        .max(1e-3);
    (0..p)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / p as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Outcome of [`find_roots`].
#[derive(Debug, Clone)]
pub struct RootSearch {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

/// All roots of a monic polynomial of degree >= 1.
///
/// Companion eigenvalues seed a Gauss-Seidel Aberth-Ehrlich iteration that
/// runs until every correction is at round-off level.
pub fn find_roots(coeffs: &[Complex64], max_iter: usize) -> RootSearch {
    let p = coeffs.len() - 1;
    assert!(p >= 1, "polynomial must have degree >= 1");
    if p == 1 {
        return RootSearch {
            roots: vec![-coeffs[1]],
            iterations: 0,
            converged: true,
        };
    }

    let mut z = companion_eigenvalues(coeffs).unwrap_or_else(|| circle_guesses(coeffs));
    // exactly coincident seeds make the Aberth sum singular
    for k in 1..p {
        for j in 0..k {
            if z[k] == z[j] {
                let nudge = 1e-7 * (1.0 + z[k].norm());
                z[k] += Complex64::new(0.0, nudge);
            }
        }
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut max_rel_step = 0.0_f64;
        for k in 0..p {
            let (q, dq) = eval_with_derivative(coeffs, z[k]);
            if q == ZERO {
                continue;
            }
            let ratio = q / dq;
            let mut repulsion = ZERO;
            for j in 0..p {
                if j != k {
                    repulsion += (z[k] - z[j]).inv();
                }
            }
            let step = ratio / (ONE - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] -= step;
            max_rel_step = max_rel_step.max(step.norm() / z[k].norm().max(f64::MIN_POSITIVE));
        }
        if max_rel_step <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }

    RootSearch {
        roots: z,
        iterations,
        converged,
    }
}
