//! Second-order finite differences for `H_V = −c² d²/dx² + b² + V` and `d/dx`
//! on `(−X, X)` with homogeneous Dirichlet conditions.

use std::ops::{Mul, Sub};

use crate::error::{KreinError, Result};
use crate::potentials::{Potential, ProblemParams};

/// Uniform interior grid `x_j = −X + j h`, `j = 1..=n`, `h = 2X/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_interior: usize,
}

impl Grid {
    pub fn new(half_width: f64, n_interior: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(KreinError::InvalidInput(format!("grid half-width must be positive, got {half_width}")));
        }
        if n_interior < 3 {
            return Err(KreinError::InvalidInput(format!("need at least 3 interior nodes, got {n_interior}")));
        }
        Ok(Self { half_width, n_interior })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_interior + 1) as f64
    }

    /// Node `j` for `j` in `0..n_interior` (0-based).
    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|j| self.node(j)).collect()
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(KreinError::DimensionMismatch {
                expected: diagonal.len().saturating_sub(1),
                got: off_diagonal.len(),
            });
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(KreinError::InvalidInput("tridiagonal matrix has non-finite entries".into()));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if u.len() != n {
            return Err(KreinError::DimensionMismatch { expected: n, got: u.len() });
        }
        Ok((0..n)
            .map(|j| {
                let mut acc = self.diagonal[j] * u[j];
                if j > 0 {
                    acc += self.off_diagonal[j - 1] * u[j - 1];
                }
                if j + 1 < n {
                    acc += self.off_diagonal[j] * u[j + 1];
                }
                acc
            })
            .collect())
    }

    /// Infinity norm (equal to the 1-norm by symmetry).
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let left = if j > 0 { self.off_diagonal[j - 1].abs() } else { 0.0 };
                let right = if j + 1 < n { self.off_diagonal[j].abs() } else { 0.0 };
                self.diagonal[j].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diagonal[i],
            1 => self.off_diagonal[i.min(j)],
            _ => 0.0,
        })
    }
}

/// Antisymmetric tridiagonal matrix `scale · T` where `T` has superdiagonal
/// `off_diagonal` and subdiagonal `−off_diagonal`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewTridiag {
    off_diagonal: Vec<f64>,
    scale: f64,
}

impl SkewTridiag {
    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.off_diagonal.len() + 1
    }

    pub fn apply<T>(&self, u: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.dim();
        if u.len() != n {
            return Err(KreinError::DimensionMismatch { expected: n, got: u.len() });
        }
        Ok((0..n)
            .map(|j| {
                let right = if j + 1 < n { u[j + 1] * self.off_diagonal[j] } else { T::default() };
                let left = if j > 0 { u[j - 1] * self.off_diagonal[j - 1] } else { T::default() };
                (right - left) * self.scale
            })
            .collect())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                self.scale * self.off_diagonal[i]
            } else if i == j + 1 {
                -self.scale * self.off_diagonal[j]
            } else {
                0.0
            }
        })
    }
}

/// Three-point stencil for `H_V`, potential sampled at the nodes.
pub fn assemble_h(p: &Potential, params: ProblemParams, g: &Grid) -> SymTridiag {
    let h = g.spacing();
    let c2 = params.c() * params.c();
    let base = 2.0 * c2 / (h * h) + params.schrodinger_threshold();
    let diagonal = g.nodes().into_iter().map(|x| base + p.eval(x)).collect();
    let off_diagonal = vec![-c2 / (h * h); g.n_interior() - 1];
    SymTridiag { diagonal, off_diagonal }
}

/// Central difference `(u_{j+1} − u_{j−1})/(2h)` with zero ghost values.
pub fn assemble_d(g: &Grid) -> SkewTridiag {
    SkewTridiag { off_diagonal: vec![0.5; g.n_interior() - 1], scale: 1.0 / g.spacing() }
}

/// The real derivative `d/dx` of interior samples, by central differences.
pub fn apply_derivative<T>(g: &Grid, u: &[T]) -> Result<Vec<T>>
where
    T: Copy + Default + Sub<Output = T> + Mul<f64, Output = T>,
{
    if u.len() != g.n_interior() {
        return Err(KreinError::DimensionMismatch { expected: g.n_interior(), got: u.len() });
    }
    let inv_2h = 0.5 / g.spacing();
    let n = u.len();
    Ok((0..n)
        .map(|j| {
            let right = if j + 1 < n { u[j + 1] } else { T::default() };
            let left = if j > 0 { u[j - 1] } else { T::default() };
            (right - left) * inv_2h
        })
        .collect())
}
