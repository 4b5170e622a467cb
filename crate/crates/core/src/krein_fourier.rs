//! Periodic Fourier realization of `𝓛 = c²|D| + b²|D|⁻¹ + |D|⁻¹V`, the
//! signature `𝒥 = sgn(λ)` and the pencil matrix `𝒜 = 𝒥𝓛`.
//!
//! Coefficients are stored in the rescaled basis `ũ_k = |λ_k|^{1/2} û_k`, in
//! which the `Ḣ^{1/2}` inner product is the standard one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{KreinError, Result};
use crate::potentials::{Potential, ProblemParams};
use crate::spectra::HermitianMatrix;

/// Hermiticity defect tolerated by [`HermitianDense::new`], relative to the max entry.
const HERMITIAN_TOL: f64 = 1e-12;

/// Periodic grid on `[−X, X)` with `n_modes` collocation nodes.
///
/// Retained wavenumbers are `λ_k = πk/X` for `0 < |k| < n_modes/2`, ascending
/// in `k`. Both the zero mode and the unpaired Nyquist mode are left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    half_period: f64,
    n_modes: usize,
}

impl FourierGrid {
    pub fn new(half_period: f64, n_modes: usize) -> Result<Self> {
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(KreinError::InvalidInput(format!("half period must be positive, got {half_period}")));
        }
        if n_modes < 8 || !n_modes.is_multiple_of(2) {
            return Err(KreinError::InvalidInput(format!("n_modes must be even and at least 8, got {n_modes}")));
        }
        Ok(Self { half_period, n_modes })
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Number of retained modes.
    pub fn dim(&self) -> usize {
        self.n_modes - 2
    }

    /// Integer labels `k` of the retained modes, ascending.
    pub fn mode_labels(&self) -> Vec<i64> {
        let half = (self.n_modes / 2) as i64;
        (1 - half..half).filter(|&k| k != 0).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        let step = std::f64::consts::PI / self.half_period;
        self.mode_labels().into_iter().map(|k| step * k as f64).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = 2.0 * self.half_period / self.n_modes as f64;
        (0..self.n_modes).map(|j| -self.half_period + h * j as f64).collect()
    }
}

/// A complex Hermitian matrix (checked on construction).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianDense {
    matrix: DMatrix<Complex64>,
}

impl HermitianDense {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(KreinError::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(KreinError::InvalidInput(format!("matrix is not Hermitian (relative defect {defect:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }
}

/// `max |M − M*| / max |M|`.
pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

impl HermitianMatrix for HermitianDense {
    type Scalar = Complex64;

    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn decompose(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        self.matrix.decompose()
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        HermitianMatrix::eigenvalues(&self.matrix)
    }
}

/// Diagonal of `±1` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureDiag {
    signs: Vec<i8>,
}

impl SignatureDiag {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(KreinError::InvalidInput("signature entries must be ±1".into()));
        }
        Ok(Self { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn trace(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if v.len() != self.dim() {
            return Err(KreinError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(DVector::from_iterator(v.len(), v.iter().zip(&self.signs).map(|(z, &s)| z * s as f64)))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.signs.iter().map(|&s| Complex64::new(s as f64, 0.0)),
        ))
    }
}

/// `c²|λ| + b²/|λ|`.
pub fn free_symbol(lambda: f64, params: ProblemParams) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(KreinError::InvalidInput(format!("free symbol needs a nonzero finite wavenumber, got {lambda}")));
    }
    let a = lambda.abs();
    Ok(params.c() * params.c() * a + params.schrodinger_threshold() / a)
}

/// Coefficients `c_m` of `V ≈ Σ c_m e^{iπ m x / X}` from node samples, `m` taken mod `n_modes`.
fn potential_coefficients(p: &Potential, fg: &FourierGrid) -> Vec<Complex64> {
    let n = fg.n_modes();
    let mut buf: Vec<Complex64> = fg.nodes().into_iter().map(|x| Complex64::new(p.eval(x), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // The grid starts at −X, which contributes the factor e^{iπm} = (−1)^m.
    buf.iter()
        .enumerate()
        .map(|(m, z)| if m % 2 == 0 { z / n as f64 } else { -z / n as f64 })
        .collect()
}

/// `diag(free_symbol(λ_k)) + S` with `S_kl = |λ_k|^{−1/2} V̂(λ_k − λ_l) |λ_l|^{−1/2}`.
pub fn assemble_l(p: &Potential, params: ProblemParams, fg: &FourierGrid) -> HermitianDense {
    let n = fg.n_modes() as i64;
    let labels = fg.mode_labels();
    let lambdas = fg.wavenumbers();
    let weights: Vec<f64> = lambdas.iter().map(|l| l.abs().powf(-0.5)).collect();
    let coefficients = potential_coefficients(p, fg);
    let m = fg.dim();
    let mut matrix = DMatrix::from_fn(m, m, |k, l| {
        let diff = (labels[k] - labels[l]).rem_euclid(n) as usize;
        coefficients[diff] * (weights[k] * weights[l])
    });
    for k in 0..m {
        // Hermitian up to rounding; pin the diagonal to the real axis.
        matrix[(k, k)] = Complex64::new(matrix[(k, k)].re + free_symbol(lambdas[k], params).expect("nonzero mode"), 0.0);
    }
    HermitianDense { matrix }
}

pub fn assemble_j(fg: &FourierGrid) -> SignatureDiag {
    SignatureDiag { signs: fg.mode_labels().iter().map(|&k| if k > 0 { 1 } else { -1 }).collect() }
}

/// `J · L`.
pub fn assemble_pencil(l: &HermitianDense, j: &SignatureDiag) -> Result<DMatrix<Complex64>> {
    if l.matrix.nrows() != j.dim() {
        return Err(KreinError::DimensionMismatch { expected: l.matrix.nrows(), got: j.dim() });
    }
    let mut a = l.matrix.clone();
    for (r, &s) in j.signs.iter().enumerate() {
        if s < 0 {
            a.row_mut(r).neg_mut();
        }
    }
    Ok(a)
}

/// Node samples `u(x_j)` to rescaled coefficients `√(2X)·|λ_k|^{1/2}·û_k`, whose
/// squared norm approximates `(|D|u, u)_{L²}`.
pub fn embed_l2_to_krein(fg: &FourierGrid, u: &[Complex64]) -> Result<DVector<Complex64>> {
    let n = fg.n_modes();
    if u.len() != n {
        return Err(KreinError::DimensionMismatch { expected: n, got: u.len() });
    }
    let mut buf = u.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let root = (2.0 * fg.half_period()).sqrt();
    let out = fg.mode_labels().into_iter().zip(fg.wavenumbers()).map(|(k, lambda)| {
        let a = buf[k.rem_euclid(n as i64) as usize] / n as f64;
        let a = if k.rem_euclid(2) == 0 { a } else { -a };
        a * root * lambda.abs().sqrt()
    });
    Ok(DVector::from_iterator(fg.dim(), out))
}

/// `‖u‖²_{L²}` of the function with rescaled coefficients `v`.
pub fn l2_norm_squared(fg: &FourierGrid, v: &DVector<Complex64>) -> Result<f64> {
    if v.len() != fg.dim() {
        return Err(KreinError::DimensionMismatch { expected: fg.dim(), got: v.len() });
    }
    Ok(v.iter().zip(fg.wavenumbers()).map(|(z, l)| z.norm_sqr() / l.abs()).sum())
}
