//! Order-p linear recurrences with constant coefficients,
//!
//! ```text
//! x_{n+p} = a_1 x_{n+p-1} + ... + a_p x_n + f_n,
//! ```
//!
//! their characteristic roots, forward simulation and residual measurement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UlamError};
use crate::poly;
use crate::series::{Forcing, Norm, Series, Trajectory};
use crate::sum::ComplexSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

/// A validated recurrence: a_p != 0 and, for the real field, real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSpec {
    coefficients: Vec<Complex64>,
    field: Field,
    dim: usize,
    norm: Norm,
}

impl RecurrenceSpec {
    pub fn new(coefficients: Vec<Complex64>, field: Field, dim: usize, norm: Norm) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(UlamError::InvalidSpec(
                "field `p`: order must be at least 1".into(),
            ));
        }
        if dim == 0 {
            return Err(UlamError::InvalidSpec(
                "field `dim`: must be at least 1".into(),
            ));
        }
        if coefficients
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(UlamError::InvalidSpec(
                "field `a`: coefficients must be finite".into(),
            ));
        }
        if coefficients.last().is_some_and(|a| a.norm() == 0.0) {
            return Err(UlamError::InvalidSpec(format!(
                "field `a[{}]`: a_p must be nonzero",
                coefficients.len() - 1
            )));
        }
        if field == Field::Real {
            if let Some(k) = coefficients.iter().position(|c| c.im != 0.0) {
                return Err(UlamError::InvalidSpec(format!(
                    "field `a[{k}]`: nonzero imaginary part but field is real"
                )));
            }
        }
        Ok(Self {
            coefficients,
            field,
            dim,
            norm,
        })
    }

    /// Scalar real recurrence with the default sup norm.
    pub fn real(coefficients: &[f64]) -> Result<Self> {
        let a = coefficients
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::new(a, Field::Real, 1, Norm::Sup)
    }

    /// Scalar complex recurrence.
    pub fn complex(coefficients: &[Complex64]) -> Result<Self> {
        Self::new(coefficients.to_vec(), Field::Complex, 1, Norm::Sup)
    }

    /// Recurrence whose characteristic roots are exactly `roots`.
    pub fn from_roots(roots: &[Complex64], field: Field, dim: usize, norm: Norm) -> Result<Self> {
        let mut monic = poly::from_roots(roots);
        let mut a: Vec<Complex64> = monic.drain(1..).map(|c| -c).collect();
        if field == Field::Real {
            for c in &mut a {
                c.im = 0.0;
            }
        }
        Self::new(a, field, dim, norm)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn with_dim(mut self, dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(UlamError::InvalidSpec(
                "field `dim`: must be at least 1".into(),
            ));
        }
        self.dim = dim;
        self.norm = norm;
        Ok(self)
    }

    /// Monic characteristic polynomial r^p - a_1 r^{p-1} - ... - a_p,
    /// highest degree first.
    pub fn characteristic_polynomial(&self) -> Vec<Complex64> {
        std::iter::once(Complex64::new(1.0, 0.0))
            .chain(self.coefficients.iter().map(|&a| -a))
            .collect()
    }
}

/// Numeric bands used by [`classify_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Band around |r| = 1 that counts as on the unit circle.
    pub unit_circle: f64,
    /// Relative separation (times max |r_k|) below which roots count as repeated.
    pub separation: f64,
    /// Relative radius within which roots are treated as one numerically split
    /// multiple root when testing the unit circle.
    pub cluster: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            unit_circle: 1e-9,
            separation: 1e-8,
            cluster: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Relative distance within which two roots of a real polynomial are
    /// matched as a conjugate pair.
    pub pairing_tol: f64,
    pub tolerances: ToleranceConfig,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_iter: 500,
            pairing_tol: 1e-6,
            tolerances: ToleranceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralClass {
    AllOutsideUnitDisc,
    HyperbolicMixed,
    OnUnitCircle,
    NearDegenerate,
}

/// Characteristic roots, sorted by modulus and then argument.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub moduli: Vec<f64>,
    pub min_separation: f64,
    pub classification: SpectralClass,
    pub on_unit_circle: bool,
    pub near_degenerate: bool,
    /// max_k |q(r_k)| for the monic characteristic polynomial q.
    pub residual_bound: f64,
}

impl RootSet {
    /// Builds a root set from explicitly given roots; the characteristic
    /// polynomial is their expansion.
    pub fn from_roots(roots: &[Complex64], tol: &ToleranceConfig) -> Self {
        let coeffs = poly::from_roots(roots);
        Self::assemble(roots.to_vec(), &coeffs, tol)
    }

    fn assemble(mut roots: Vec<Complex64>, coeffs: &[Complex64], tol: &ToleranceConfig) -> Self {
        roots.sort_by(|a, b| {
            a.norm()
                .total_cmp(&b.norm())
                .then(a.arg().total_cmp(&b.arg()))
        });
        let moduli: Vec<f64> = roots.iter().map(|r| r.norm()).collect();
        let mut min_separation = f64::INFINITY;
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                min_separation = min_separation.min((roots[i] - roots[j]).norm());
            }
        }
        let residual_bound = roots
            .iter()
            .map(|&r| poly::eval(coeffs, r).norm())
            .fold(0.0, f64::max);
        let mut set = Self {
            roots,
            moduli,
            min_separation,
            classification: SpectralClass::AllOutsideUnitDisc,
            on_unit_circle: false,
            near_degenerate: false,
            residual_bound,
        };
        set.on_unit_circle = touches_unit_circle(&set.roots, coeffs, tol);
        set.near_degenerate = is_near_degenerate(&set, tol) || unresolved_pair(&set.roots, coeffs);
        set.classification = classify_roots(&set, tol);
        set
    }

    pub fn order(&self) -> usize {
        self.roots.len()
    }

    pub fn min_modulus(&self) -> f64 {
        self.moduli.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli.iter().copied().fold(0.0, f64::max)
    }

    /// Errors unless every root lies strictly outside the closed unit disc
    /// and the roots are distinct.
    pub fn require_outside(&self) -> Result<()> {
        match self.classification {
            SpectralClass::AllOutsideUnitDisc => Ok(()),
            SpectralClass::OnUnitCircle => Err(UlamError::NotUlamStable {
                modulus: self.closest_to_unit_circle(),
            }),
            SpectralClass::NearDegenerate => Err(UlamError::DegenerateRoots {
                separation: self.min_separation,
            }),
            other => Err(UlamError::NotApplicable(other)),
        }
    }

    pub fn closest_to_unit_circle(&self) -> f64 {
        self.moduli
            .iter()
            .copied()
            .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
            .unwrap_or(f64::NAN)
    }
}

fn on_circle(z: Complex64, tol: &ToleranceConfig) -> bool {
    (z.norm() - 1.0).abs() <= tol.unit_circle
}

/// Groups of roots within `tol.cluster` (relative) of each other, transitively.
fn clusters(roots: &[Complex64], tol: &ToleranceConfig) -> Vec<Vec<usize>> {
    let p = roots.len();
    let mut visited = vec![false; p];
    let mut out = Vec::new();
    for start in 0..p {
        if visited[start] {
            continue;
        }
        let mut members = vec![start];
        visited[start] = true;
        let mut head = 0;
        while head < members.len() {
            let i = members[head];
            head += 1;
            for j in 0..p {
                let radius = tol.cluster * roots[i].norm().max(1.0);
                if !visited[j] && (roots[i] - roots[j]).norm() <= radius {
                    visited[j] = true;
                    members.push(j);
                }
            }
        }
        out.push(members);
    }
    out
}

/// Centre of an m-fold cluster as a root of q^(m-1), which is simple there.
fn cluster_centre(
    coeffs: &[Complex64],
    mean: Complex64,
    m: usize,
    radius: f64,
) -> Option<Complex64> {
    let mut d = coeffs.to_vec();
    for _ in 1..m {
        d = poly::derivative(&d);
    }
    let mut z = mean;
    for _ in 0..60 {
        let (v, dv) = poly::eval_with_derivative(&d, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    ((z - mean).norm() <= radius && z.re.is_finite() && z.im.is_finite()).then_some(z)
}

fn touches_unit_circle(roots: &[Complex64], coeffs: &[Complex64], tol: &ToleranceConfig) -> bool {
    if roots.iter().any(|&r| on_circle(r, tol)) {
        return true;
    }
    // A multiple root comes back from floating point as a small cluster whose
    // members can sit well off the circle. Its centre is recovered from the
    // derivative of matching order; the plain mean is the fallback.
    for members in clusters(roots, tol) {
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mean = members.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
        if on_circle(mean, tol) {
            return true;
        }
        let radius = tol.cluster * mean.norm().max(1.0);
        if cluster_centre(coeffs, mean, m, radius).is_some_and(|z| on_circle(z, tol)) {
            return true;
        }
    }
    false
}

/// True when two roots are closer than what floating point can resolve
/// around them, i.e. a repeated root split by rounding.
fn unresolved_pair(roots: &[Complex64], coeffs: &[Complex64]) -> bool {
    let uncertainty: Vec<f64> = roots
        .iter()
        .map(|&r| {
            let (_, dq) = poly::eval_with_derivative(coeffs, r);
            let magnitude = coeffs.iter().fold(0.0, |acc, c| acc * r.norm() + c.norm());
            f64::EPSILON * magnitude / dq.norm()
        })
        .collect();
    (0..roots.len()).any(|i| {
        (i + 1..roots.len())
            .any(|j| (roots[i] - roots[j]).norm() <= 100.0 * uncertainty[i].max(uncertainty[j]))
    })
}

fn is_near_degenerate(set: &RootSet, tol: &ToleranceConfig) -> bool {
    set.roots.len() > 1 && set.min_separation <= tol.separation * set.max_modulus()
}

/// Spectral classification; OnUnitCircle wins over NearDegenerate.
pub fn classify_roots(roots: &RootSet, tol: &ToleranceConfig) -> SpectralClass {
    if roots.on_unit_circle || roots.roots.iter().any(|&r| on_circle(r, tol)) {
        SpectralClass::OnUnitCircle
    } else if roots.near_degenerate || is_near_degenerate(roots, tol) {
        SpectralClass::NearDegenerate
    } else if roots.moduli.iter().all(|&m| m > 1.0 + tol.unit_circle) {
        SpectralClass::AllOutsideUnitDisc
    } else {
        SpectralClass::HyperbolicMixed
    }
}

/// All p roots of r^p = a_1 r^{p-1} + ... + a_p.
pub fn characteristic_roots(spec: &RecurrenceSpec, cfg: &RootConfig) -> Result<RootSet> {
    let coeffs = spec.characteristic_polynomial();
    let search = poly::find_roots(&coeffs, cfg.max_iter);
    let mut roots = search.roots;
    if spec.field() == Field::Real {
        pair_conjugates(&mut roots, cfg.pairing_tol);
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let worst = roots
        .iter()
        .map(|&r| poly::eval(&coeffs, r).norm())
        .fold(0.0, f64::max);
    if !(worst <= cfg.residual_tol * scale) {
        return Err(UlamError::NonConvergence {
            iterations: search.iterations,
            residual: worst,
        });
    }
    Ok(RootSet::assemble(roots, &coeffs, &cfg.tolerances))
}

/// Make non-real roots exact conjugate pairs and the rest exactly real.
///
/// Pairs are matched closest first and only within `tol` (relative), so a
/// split repeated root never steals the partner of an unrelated pair. A root
/// left without a partner must be real for a real polynomial.
fn pair_conjugates(roots: &mut [Complex64], tol: f64) {
    let p = roots.len();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..p {
        for j in 0..p {
            if roots[i].im > 0.0 && roots[j].im < 0.0 {
                candidates.push(((roots[i] - roots[j].conj()).norm(), i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; p];
    for (dist, i, j) in candidates {
        if used[i] || used[j] || dist > tol * roots[i].norm().max(1.0) {
            continue;
        }
        let avg = (roots[i] + roots[j].conj()) * 0.5;
        roots[i] = avg;
        roots[j] = avg.conj();
        used[i] = true;
        used[j] = true;
    }
    for (r, paired) in roots.iter_mut().zip(&used) {
        if !paired {
            r.im = 0.0;
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(UlamError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Runs the forced recurrence from `initial` (p points) for `n_steps` entries.
///
/// Forcing entries beyond the supplied ones are taken as zero and counted in
/// [`Trajectory::zero_filled`].
pub fn simulate(
    spec: &RecurrenceSpec,
    initial: &Series,
    forcing: &Forcing,
    n_steps: usize,
) -> Result<Trajectory> {
    let p = spec.order();
    if initial.len() != p {
        return Err(UlamError::InvalidLength {
            needed: p,
            got: initial.len(),
        });
    }
    if n_steps < p {
        return Err(UlamError::InvalidLength {
            needed: p,
            got: n_steps,
        });
    }
    let d = spec.dim();
    check_dim(d, initial.dim())?;
    if !forcing.is_empty() {
        check_dim(d, forcing.dim())?;
    }

    let a = spec.coefficients();
    let mut x = initial.clone();
    let mut zero_filled = 0;
    let mut next = vec![Complex64::new(0.0, 0.0); d];
    for n in 0..n_steps - p {
        let f = if n < forcing.len() {
            Some(forcing.get(n))
        } else {
            zero_filled += 1;
            None
        };
        for (c, slot) in next.iter_mut().enumerate() {
            let mut acc = ComplexSum::new();
            for (i, &ai) in a.iter().enumerate() {
                acc.add(ai * x.get(n + p - 1 - i)[c]);
            }
            if let Some(f) = f {
                acc.add(f[c]);
            }
            *slot = acc.value();
        }
        x.push(&next);
    }
    Ok(Trajectory {
        values: x,
        zero_filled,
    })
}

/// f_n = x_{n+p} - a_1 x_{n+p-1} - ... - a_p x_n for n = 0..N-p-1.
pub fn residuals(spec: &RecurrenceSpec, traj: &Trajectory) -> Result<Forcing> {
    let p = spec.order();
    let n = traj.len();
    if n <= p {
        return Err(UlamError::InvalidLength {
            needed: p + 1,
            got: n,
        });
    }
    let d = spec.dim();
    check_dim(d, traj.dim())?;
    let a = spec.coefficients();
    let mut out = Series::zeros(d, n - p);
    for m in 0..n - p {
        let row = out.get_mut(m);
        for (c, slot) in row.iter_mut().enumerate() {
            let mut acc = ComplexSum::new();
            acc.add(traj.get(m + p)[c]);
            for (i, &ai) in a.iter().enumerate() {
                acc.add(-ai * traj.get(m + p - 1 - i)[c]);
            }
            *slot = acc.value();
        }
    }
    Ok(Forcing::new(out, spec.norm()))
}
