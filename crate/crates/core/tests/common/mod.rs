#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ulam_core::{Complex64, Field, Norm, RecurrenceSpec, Series, Trajectory};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn separated(roots: &[Complex64], z: Complex64, min_sep: f64) -> bool {
    roots.iter().all(|r| (r - z).norm() >= min_sep)
}

/// `p` roots with moduli in `[lo, hi]` and pairwise separation >= `min_sep`.
///
/// With `real = true` the set is closed under conjugation (real roots get a
/// random sign, complex ones come in pairs), so the recurrence has real
/// coefficients.
pub fn random_roots(
    rng: &mut TestRng,
    p: usize,
    lo: f64,
    hi: f64,
    min_sep: f64,
    real: bool,
) -> Vec<Complex64> {
    'retry: loop {
        let mut roots: Vec<Complex64> = Vec::with_capacity(p);
        while roots.len() < p {
            let m = rng.gen_range(lo..=hi);
            let remaining = p - roots.len();
            let want_pair = real && remaining >= 2 && rng.gen_bool(0.5);
            let z = if !real {
                Complex64::from_polar(m, rng.gen_range(0.0..std::f64::consts::TAU))
            } else if want_pair {
                Complex64::from_polar(m, rng.gen_range(0.05..std::f64::consts::PI - 0.05))
            } else if rng.gen_bool(0.5) {
                Complex64::new(m, 0.0)
            } else {
                Complex64::new(-m, 0.0)
            };
            if !separated(&roots, z, min_sep) {
                continue 'retry;
            }
            roots.push(z);
            if want_pair {
                if !separated(&roots, z.conj(), min_sep) {
                    continue 'retry;
                }
                roots.push(z.conj());
            }
        }
        return roots;
    }
}

/// Recurrence with the given roots; real field when the roots are closed
/// under conjugation and `real` is set.
pub fn spec_from_roots(roots: &[Complex64], real: bool, dim: usize, norm: Norm) -> RecurrenceSpec {
    let field = if real { Field::Real } else { Field::Complex };
    RecurrenceSpec::from_roots(roots, field, dim, norm).unwrap()
}

/// Random point with norm at most `eps` (a third of them exactly `eps`).
pub fn random_point(
    rng: &mut TestRng,
    dim: usize,
    eps: f64,
    real: bool,
    norm: Norm,
) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            Complex64::new(re, im)
        })
        .collect();
    let size = norm.eval(&v).max(1e-300);
    let target = if rng.gen_bool(1.0 / 3.0) {
        eps
    } else {
        eps * rng.gen_range(0.0..1.0)
    };
    for z in &mut v {
        *z *= target / size;
    }
    while norm.eval(&v) > eps {
        for z in &mut v {
            *z *= 1.0 - f64::EPSILON;
        }
    }
    v
}

pub fn random_forcing(
    rng: &mut TestRng,
    len: usize,
    dim: usize,
    eps: f64,
    real: bool,
    norm: Norm,
) -> Series {
    let pts: Vec<Vec<Complex64>> = (0..len)
        .map(|_| random_point(rng, dim, eps, real, norm))
        .collect();
    Series::from_points(dim, &pts).unwrap()
}

/// Solves the forced recurrence backwards from `terminal` (the last p
/// values) so the result stays bounded when every root lies outside the
/// unit disc. Returns x_0..x_{forcing.len()+p-1}.
pub fn backward_solution(spec: &RecurrenceSpec, forcing: &Series, terminal: &Series) -> Series {
    let p = spec.order();
    let a = spec.coefficients();
    let d = spec.dim();
    let len = forcing.len() + p;
    let mut x = Series::zeros(d, len);
    for j in 0..p {
        x.get_mut(len - p + j).copy_from_slice(terminal.get(j));
    }
    for n in (0..forcing.len()).rev() {
        for c in 0..d {
            // a_p x_n = x_{n+p} - sum_{i<p} a_i x_{n+p-i} - f_n
            let mut acc = x.get(n + p)[c] - forcing.get(n)[c];
            for i in 1..p {
                acc -= a[i - 1] * x.get(n + p - i)[c];
            }
            x.get_mut(n)[c] = acc / a[p - 1];
        }
    }
    x
}

/// Bounded approximate solution of length `len` whose forcing has norm at
/// most `eps`, plus a homogeneous component of size O(1) near index
/// `len + pad`.
pub fn noisy_trajectory(
    rng: &mut TestRng,
    spec: &RecurrenceSpec,
    len: usize,
    pad: usize,
    eps: f64,
) -> Trajectory {
    let p = spec.order();
    let real = spec.field() == Field::Real;
    let total = len + pad;
    let forcing = random_forcing(rng, total - p, spec.dim(), eps, real, spec.norm());
    let terminal = random_forcing(rng, p, spec.dim(), 1.0, real, spec.norm());
    let x = backward_solution(spec, &forcing, &terminal);
    Trajectory::new(x.truncated(len))
}
