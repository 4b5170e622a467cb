//! Eigen-decompositions shared by both discretizations, negative counts,
//! kernel detection and the pseudo-inverse on the range.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KreinError, Result};
use crate::lapack;
use crate::potentials::ProblemParams;
use crate::schrodinger_fd::SymTridiag;

/// Default kernel window, relative to `2bc`.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-4;

/// Relative overlap with the kernel tolerated by [`apply_pseudo_inverse`].
pub const ORTH_TOL: f64 = 1e-6;

/// Imaginary parts up to this size are dropped after phase alignment.
const REAL_CUTOFF: f64 = 1e-8;

/// Residual bound for general eigenpairs, relative to the matrix 1-norm.
pub const GENERAL_RESIDUAL_TOL: f64 = 1e-7;

/// Scalar type of eigenvectors: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

/// A Hermitian (or real symmetric) matrix with a full eigensolver.
pub trait HermitianMatrix {
    type Scalar: Scalar;
    fn dim(&self) -> usize;
    /// Ascending eigenvalues and orthonormal eigenvectors as columns.
    fn decompose(&self) -> Result<(Vec<f64>, DMatrix<Self::Scalar>)>;
    fn eigenvalues(&self) -> Result<Vec<f64>>;
}

impl HermitianMatrix for SymTridiag {
    type Scalar = f64;

    fn dim(&self) -> usize {
        SymTridiag::dim(self)
    }

    fn decompose(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        lapack::tridiagonal_eigen(self.diagonal(), self.off_diagonal())
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        lapack::tridiagonal_eigenvalues_range(self.diagonal(), self.off_diagonal(), 0, self.dim() - 1)
    }
}

impl HermitianMatrix for DMatrix<f64> {
    type Scalar = f64;

    fn dim(&self) -> usize {
        self.nrows()
    }

    fn decompose(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if !self.is_square() {
            return Err(KreinError::DimensionMismatch { expected: self.nrows(), got: self.ncols() });
        }
        let scale = self.amax().max(f64::MIN_POSITIVE);
        if (self - self.transpose()).amax() > 1e-12 * scale {
            return Err(KreinError::InvalidInput("matrix is not symmetric".into()));
        }
        let eig = self.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.nrows(), self.nrows(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.decompose().map(|(w, _)| w)
    }
}

impl HermitianMatrix for DMatrix<Complex64> {
    type Scalar = Complex64;

    fn dim(&self) -> usize {
        self.nrows()
    }

    fn decompose(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        lapack::hermitian_eigen(self)
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        lapack::hermitian_eigenvalues(self)
    }
}

/// Full spectral decomposition together with the kernel-window metadata.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Scalar> {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<T>,
    reference_scale: f64,
    kernel_tol: f64,
}

/// Result of [`detect_kernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInfo<T: Scalar> {
    pub dimension: usize,
    /// Unit-norm, phase-aligned kernel vector.
    pub vector: Option<DVector<T>>,
    pub raw_eigenvalue: Option<f64>,
    /// Position of the kernel eigenvalue in the ascending spectrum.
    pub position: Option<usize>,
}

impl<T: Scalar> KernelInfo<T> {
    pub fn none() -> Self {
        Self { dimension: 0, vector: None, raw_eigenvalue: None, position: None }
    }

    pub fn vector(&self) -> Option<&DVector<T>> {
        self.vector.as_ref()
    }
}

impl<T: Scalar> SpectrumResult<T> {
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenvectors: DMatrix<T>,
        params: ProblemParams,
        kernel_tol: f64,
    ) -> Result<Self> {
        if !(kernel_tol.is_finite() && kernel_tol > 0.0) {
            return Err(KreinError::InvalidInput(format!("kernel_tol must be positive, got {kernel_tol}")));
        }
        if eigenvectors.ncols() != eigenvalues.len() {
            return Err(KreinError::DimensionMismatch { expected: eigenvalues.len(), got: eigenvectors.ncols() });
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(KreinError::InvalidInput("eigenvalues must be ascending".into()));
        }
        Ok(Self { eigenvalues, eigenvectors, reference_scale: params.threshold(), kernel_tol })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    pub fn reference_scale(&self) -> f64 {
        self.reference_scale
    }

    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }

    /// Half-width of the kernel window, `kernel_tol · 2bc`.
    pub fn kernel_window(&self) -> f64 {
        self.kernel_tol * self.reference_scale
    }

    pub fn count_negative(&self) -> usize {
        let window = self.kernel_window();
        self.eigenvalues.iter().filter(|&&l| l < -window).count()
    }

    /// Eigenvalues `≤ window`, i.e. negatives plus kernel candidates.
    pub fn count_nonpositive(&self) -> usize {
        let window = self.kernel_window();
        self.eigenvalues.iter().filter(|&&l| l <= window).count()
    }

    /// Eigenvalues strictly below `level`.
    pub fn count_below(&self, level: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l < level)
    }

    pub fn kernel_candidates(&self) -> Vec<usize> {
        let window = self.kernel_window();
        (0..self.eigenvalues.len()).filter(|&i| self.eigenvalues[i].abs() <= window).collect()
    }

    pub fn detect_kernel(&self) -> Result<KernelInfo<T>> {
        let candidates = self.kernel_candidates();
        match candidates.as_slice() {
            [] => Ok(KernelInfo::none()),
            [i] => Ok(KernelInfo {
                dimension: 1,
                vector: Some(phase_align(self.eigenvectors.column(*i).into_owned())),
                raw_eigenvalue: Some(self.eigenvalues[*i]),
                position: Some(*i),
            }),
            _ => Err(KreinError::KernelAmbiguity {
                candidates: candidates.iter().map(|&i| self.eigenvalues[i]).collect(),
                window: self.kernel_window(),
            }),
        }
    }

    /// `Σ_{|λ_j| > window} ⟨w, v_j⟩/λ_j · v_j`.
    pub fn apply_pseudo_inverse(&self, kernel: &KernelInfo<T>, w: &DVector<T>) -> Result<DVector<T>> {
        let n = self.eigenvalues.len();
        if w.len() != n {
            return Err(KreinError::DimensionMismatch { expected: n, got: w.len() });
        }
        let w_norm = w.norm();
        if let Some(psi) = kernel.vector() {
            let overlap = psi.dotc(w).modulus();
            let allowed = ORTH_TOL * w_norm * psi.norm();
            if overlap > allowed {
                return Err(KreinError::NotInRange { overlap, allowed });
            }
        }
        let window = self.kernel_window();
        let mut coefficients = self.eigenvectors.ad_mul(w);
        for (c, &lambda) in coefficients.iter_mut().zip(&self.eigenvalues) {
            *c = if lambda.abs() > window { c.unscale(lambda) } else { T::zero() };
        }
        Ok(&self.eigenvectors * coefficients)
    }

    /// The same decomposition with eigenvalue `position` replaced by `value`.
    ///
    /// Errors if the replacement breaks the ascending order.
    pub fn with_eigenvalue(&self, position: usize, value: f64) -> Result<Self> {
        let mut eigenvalues = self.eigenvalues.clone();
        if position >= eigenvalues.len() {
            return Err(KreinError::InvalidInput(format!("eigenvalue index {position} out of range")));
        }
        eigenvalues[position] = value;
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(KreinError::InvalidInput("replacement breaks eigenvalue ordering".into()));
        }
        Ok(Self { eigenvalues, ..self.clone() })
    }
}

/// Rotates `v` so its largest-magnitude entry is real and positive, then
/// drops imaginary parts when they are all below `1e−8`.
pub fn phase_align<T: Scalar>(mut v: DVector<T>) -> DVector<T> {
    let Some((_, pivot)) = v
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.modulus()))
        .fold(None, |best: Option<(usize, f64)>, (i, m)| match best {
            Some((_, bm)) if bm >= m => best,
            _ => Some((i, m)),
        })
        .map(|(i, _)| (i, v[i]))
    else {
        return v;
    };
    let magnitude = pivot.modulus();
    if magnitude == 0.0 {
        return v;
    }
    let rotation = pivot.conjugate().unscale(magnitude);
    v.iter_mut().for_each(|z| *z *= rotation);
    if v.iter().all(|z| z.imaginary().abs() <= REAL_CUTOFF) {
        v.iter_mut().for_each(|z| *z = T::from_real(z.real()));
    }
    v
}

pub fn eig_hermitian<M: HermitianMatrix>(
    m: &M,
    params: ProblemParams,
    kernel_tol: f64,
) -> Result<SpectrumResult<M::Scalar>> {
    let (values, vectors) = m.decompose()?;
    SpectrumResult::new(values, vectors, params, kernel_tol)
}

/// Ascending eigenvalues `first..=last` (0-based) of a tridiagonal matrix.
pub fn tridiagonal_eigenvalues(m: &SymTridiag, first: usize, last: usize) -> Result<Vec<f64>> {
    lapack::tridiagonal_eigenvalues_range(m.diagonal(), m.off_diagonal(), first, last)
}

pub fn count_negative<T: Scalar>(s: &SpectrumResult<T>) -> usize {
    s.count_negative()
}

pub fn detect_kernel<T: Scalar>(s: &SpectrumResult<T>) -> Result<KernelInfo<T>> {
    s.detect_kernel()
}

pub fn apply_pseudo_inverse<T: Scalar>(
    s: &SpectrumResult<T>,
    k: &KernelInfo<T>,
    w: &DVector<T>,
) -> Result<DVector<T>> {
    s.apply_pseudo_inverse(k, w)
}

/// Eigenvalues, unit right eigenvectors and residuals of a general complex matrix.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: DMatrix<Complex64>,
    /// `‖A v − z v‖₂` per pair.
    pub residuals: Vec<f64>,
    /// 1-norm of the decomposed matrix.
    pub matrix_norm: f64,
}

/// Eigen-decomposition of a square complex matrix, sorted by `(Re z, Im z)`.
pub fn eig_general(a: &DMatrix<Complex64>) -> Result<ComplexSpectrum> {
    let (values, vectors) = lapack::general_eigen(a)?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].re.total_cmp(&values[j].re).then(values[i].im.total_cmp(&values[j].im)));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);

    let matrix_norm = a
        .column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let av = lapack::complex_matmul(a, false, &eigenvectors)?;
    let residuals: Vec<f64> = (0..n)
        .map(|c| {
            av.column(c)
                .iter()
                .zip(eigenvectors.column(c).iter())
                .map(|(x, v)| (x - eigenvalues[c] * v).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let bound = GENERAL_RESIDUAL_TOL * matrix_norm.max(f64::MIN_POSITIVE);
    if let Some((index, &residual)) = residuals.iter().enumerate().find(|(_, &r)| r.is_nan() || r > bound) {
        return Err(KreinError::ResidualTooLarge { index, residual, bound });
    }
    Ok(ComplexSpectrum { eigenvalues, eigenvectors, residuals, matrix_norm })
}
