//! Finite sequences of points in the value space X = K^d.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UlamError};

/// Norm on the d-dimensional value space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Sup,
    Euclid,
}

impl Norm {
    pub fn eval(self, v: &[Complex64]) -> f64 {
        match self {
            Norm::Sup => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Norm::Euclid => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }
}

/// Row-major storage of `len` points of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    dim: usize,
    data: Vec<Complex64>,
}

impl Series {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(UlamError::DimensionMismatch {
                expected: dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * len],
        }
    }

    pub fn from_points(dim: usize, points: &[Vec<Complex64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.len() != dim {
                return Err(UlamError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Ok(Self { dim, data })
    }

    /// Scalar sequence (d = 1) from real values.
    pub fn from_reals(xs: &[f64]) -> Self {
        Self {
            dim: 1,
            data: xs.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn get_mut(&mut self, n: usize) -> &mut [Complex64] {
        &mut self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn push(&mut self, point: &[Complex64]) {
        debug_assert_eq!(point.len(), self.dim);
        self.data.extend_from_slice(point);
    }

    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self {
            dim: self.dim,
            data: self.data[..len * self.dim].to_vec(),
        }
    }

    pub fn max_norm(&self, norm: Norm) -> f64 {
        self.points().map(|v| norm.eval(v)).fold(0.0, f64::max)
    }

    /// Largest imaginary component, used to check real projections.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> Self {
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex64::new(z.re, 0.0))
                .collect(),
        }
    }
}

/// An approximate or exact solution x_0..x_{N-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub values: Series,
    /// Number of forcing entries that were missing and treated as zero when
    /// this trajectory was simulated.
    pub zero_filled: usize,
}

impl Trajectory {
    pub fn new(values: Series) -> Self {
        Self {
            values,
            zero_filled: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn get(&self, n: usize) -> &[Complex64] {
        self.values.get(n)
    }
}

/// Perturbation sequence f_0..f_{M-1} together with eps = max ||f_n||.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub values: Series,
    pub eps: f64,
    pub norm: Norm,
}

impl Forcing {
    pub fn new(values: Series, norm: Norm) -> Self {
        let eps = values.max_norm(norm);
        Self { values, eps, norm }
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Self::new(Series::zeros(dim, len), Norm::Sup)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn get(&self, n: usize) -> &[Complex64] {
        self.values.get(n)
    }
}
