//! Classification of the eigenvalues of `𝒜 = 𝒥𝓛` into the groups that make
//! up the Hamiltonian–Krein count, plus the symmetry and index-identity checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::index::IndexReport;
use crate::krein_fourier::HermitianDense;
use crate::lapack;
use crate::potentials::ProblemParams;
use crate::spectra::{eig_hermitian, HermitianMatrix, SpectrumResult};

pub const DEFAULT_TOL_CLASS: f64 = 1e-8;

/// Eigenvector Gram eigenvalues below this flag a near-defective real cluster.
const PARALLEL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenClass {
    RealPositive,
    RealNegative,
    ImagPositive,
    ImagNegative,
    QuadrantI,
    QuadrantII,
    QuadrantIII,
    QuadrantIV,
    NearZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedEigenvalue {
    pub re: f64,
    pub im: f64,
    pub class: EigenClass,
    pub krein_negative: Option<bool>,
    pub residual: f64,
}

impl ClassifiedEigenvalue {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PencilCounts {
    pub kappa_c_plus: usize,
    pub kappa_imag_pos: usize,
    pub kappa_quadrant_i: usize,
    pub kappa_quadrant_ii: usize,
    pub kappa_real_pos_neg_krein: usize,
    pub kappa_ham_direct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub eigenvalues: Vec<ClassifiedEigenvalue>,
    pub counts: PencilCounts,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// Hausdorff distance between the spectrum and its image under `z ↦ z*`.
    pub conjugation_mismatch: f64,
    /// Same for `z ↦ −z*`.
    pub reflection_mismatch: f64,
    pub tol: f64,
    pub within_tol: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub agree: bool,
    pub kappa_ham_direct: usize,
    pub kappa_ham_formula: Option<usize>,
    pub detail: String,
}

/// `l − λ₀ v₀v₀*` for the unique eigenvalue `λ₀` inside the kernel window, or
/// `l` unchanged when there is none.
pub fn kernel_exactify(l: &HermitianDense, kernel_tol: f64, params: ProblemParams) -> Result<HermitianDense> {
    let s = eig_hermitian(l, params, kernel_tol)?;
    kernel_exactify_with(l, &s, params).map(|(m, _)| m)
}

/// [`kernel_exactify`] reusing a decomposition of `l`; also returns the
/// decomposition of the output.
pub fn kernel_exactify_with(
    l: &HermitianDense,
    s: &SpectrumResult<Complex64>,
    params: ProblemParams,
) -> Result<(HermitianDense, SpectrumResult<Complex64>)> {
    let kernel = s.detect_kernel()?;
    let (Some(position), Some(lambda0)) = (kernel.position, kernel.raw_eigenvalue) else {
        return Ok((l.clone(), s.clone()));
    };
    let v = s.eigenvectors().column(position).into_owned();
    let mut m = l.matrix().clone();
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] -= v[i] * v[j].conj() * lambda0;
        }
    }
    let exact = HermitianDense::new(m)?;
    // Zero may sit out of order if λ₀ had a neighbour on the other side.
    let exact_spectrum = match s.with_eigenvalue(position, 0.0) {
        Ok(sp) => sp,
        Err(_) => eig_hermitian(&exact, params, s.kernel_tol())?,
    };
    Ok((exact, exact_spectrum))
}

fn classify_point(z: Complex64, threshold: f64, tol_class: f64, zero_window: f64) -> (EigenClass, Option<String>) {
    if z.norm() <= zero_window * threshold {
        return (EigenClass::NearZero, None);
    }
    let scale = z.norm().max(threshold);
    let is_real = z.im.abs() <= tol_class * scale;
    let is_imag = z.re.abs() <= tol_class * scale;
    let mut note = None;
    for (offset, axis) in [(z.im.abs(), "real"), (z.re.abs(), "imaginary")] {
        if offset > tol_class * scale && offset <= 10.0 * tol_class * scale {
            note = Some(format!("z = {z} lies within 10x the classification tolerance of the {axis} axis"));
        }
    }
    let class = if is_real && is_imag {
        note = Some(format!("z = {z} is ambiguous between the real and imaginary axes"));
        if z.re.abs() >= z.im.abs() {
            real_class(z)
        } else {
            imag_class(z)
        }
    } else if is_real {
        real_class(z)
    } else if is_imag {
        imag_class(z)
    } else {
        match (z.re > 0.0, z.im > 0.0) {
            (true, true) => EigenClass::QuadrantI,
            (false, true) => EigenClass::QuadrantII,
            (false, false) => EigenClass::QuadrantIII,
            (true, false) => EigenClass::QuadrantIV,
        }
    };
    (class, note)
}

fn real_class(z: Complex64) -> EigenClass {
    if z.re > 0.0 {
        EigenClass::RealPositive
    } else {
        EigenClass::RealNegative
    }
}

fn imag_class(z: Complex64) -> EigenClass {
    if z.im > 0.0 {
        EigenClass::ImagPositive
    } else {
        EigenClass::ImagNegative
    }
}

/// Classifies every eigenvalue of `J·L` and assembles the Krein counts.
///
/// Real nonzero eigenvalues closer than `tol_class` (relative) are grouped and
/// the number of their Krein-negative directions is the count of non-positive
/// eigenvalues of `V*LV` over the group's eigenvectors `V`.
pub fn classify_spectrum(
    cs: &crate::spectra::ComplexSpectrum,
    l: &HermitianDense,
    params: ProblemParams,
    tol_class: f64,
    zero_window: f64,
) -> Result<Classification> {
    let threshold = params.threshold();
    let mut diagnostics = Vec::new();
    let mut eigenvalues: Vec<ClassifiedEigenvalue> = cs
        .eigenvalues
        .iter()
        .zip(&cs.residuals)
        .map(|(&z, &residual)| {
            let (class, note) = classify_point(z, threshold, tol_class, zero_window);
            diagnostics.extend(note);
            ClassifiedEigenvalue { re: z.re, im: z.im, class, krein_negative: None, residual }
        })
        .collect();

    let mut real: Vec<usize> = (0..eigenvalues.len())
        .filter(|&i| matches!(eigenvalues[i].class, EigenClass::RealPositive | EigenClass::RealNegative))
        .collect();
    real.sort_by(|&a, &b| eigenvalues[a].re.total_cmp(&eigenvalues[b].re));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in real {
        let z = eigenvalues[i].re;
        match clusters.last_mut() {
            Some(cluster) => {
                let prev = eigenvalues[*cluster.last().expect("clusters are nonempty")].re;
                if (z - prev).abs() <= tol_class * z.abs().max(threshold) && (z > 0.0) == (prev > 0.0) {
                    cluster.push(i);
                } else {
                    clusters.push(vec![i]);
                }
            }
            None => clusters.push(vec![i]),
        }
    }

    let norm_l = l.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    // One product L·V for all real eigenvectors; clusters pick their columns.
    let real_columns: Vec<usize> = clusters.iter().flatten().copied().collect();
    let n = cs.eigenvectors.nrows();
    let v_real = DMatrix::from_fn(n, real_columns.len(), |r, c| cs.eigenvectors[(r, real_columns[c])]);
    let lv_real = lapack::complex_matmul(l.matrix(), false, &v_real)?;
    let mut offset = 0;
    let mut real_pos_neg = 0;
    for cluster in &clusters {
        let v = v_real.columns(offset, cluster.len()).into_owned();
        let lv = lv_real.columns(offset, cluster.len()).into_owned();
        offset += cluster.len();
        let gram_l = lapack::complex_matmul(&v, true, &lv)?;
        let gram_l = (&gram_l + gram_l.adjoint()) * Complex64::new(0.5, 0.0);
        let inertia = HermitianMatrix::eigenvalues(&gram_l)?;
        let nonpositive = inertia.iter().filter(|&&g| g <= 0.0).count();
        for (c, &i) in cluster.iter().enumerate() {
            let g = gram_l[(c, c)].re;
            eigenvalues[i].krein_negative = Some(g <= 0.0);
            if g.abs() <= 1e-10 * norm_l {
                diagnostics.push(format!("real eigenvalue {} has nearly neutral Krein signature ({g:e})", eigenvalues[i].re));
            }
        }
        if cluster.len() > 1 {
            let gram = lapack::complex_matmul(&v, true, &v)?;
            let smallest = HermitianMatrix::eigenvalues(&gram)?.first().copied().unwrap_or(1.0);
            if smallest < PARALLEL_TOL {
                diagnostics.push(format!(
                    "real cluster at {} of size {} has near-parallel eigenvectors (Gram eigenvalue {smallest:e})",
                    eigenvalues[cluster[0]].re,
                    cluster.len()
                ));
            }
        }
        if eigenvalues[cluster[0]].re > 0.0 {
            real_pos_neg += nonpositive;
        }
    }

    let count = |class: EigenClass| eigenvalues.iter().filter(|e| e.class == class).count();
    let kappa_imag_pos = count(EigenClass::ImagPositive);
    let kappa_quadrant_i = count(EigenClass::QuadrantI);
    let kappa_quadrant_ii = count(EigenClass::QuadrantII);
    let counts = PencilCounts {
        kappa_c_plus: kappa_imag_pos + kappa_quadrant_i + kappa_quadrant_ii,
        kappa_imag_pos,
        kappa_quadrant_i,
        kappa_quadrant_ii,
        kappa_real_pos_neg_krein: real_pos_neg,
        kappa_ham_direct: kappa_imag_pos + 2 * kappa_quadrant_i + 2 * real_pos_neg,
    };
    if kappa_quadrant_i != kappa_quadrant_ii {
        diagnostics.push(format!(
            "quadrant I count {kappa_quadrant_i} differs from quadrant II count {kappa_quadrant_ii}"
        ));
    }
    Ok(Classification { eigenvalues, counts, diagnostics })
}

/// Largest distance from a point of `from` to the nearest point of `to`.
fn directed_hausdorff(from: &[Complex64], to: &[Complex64]) -> f64 {
    from.iter()
        .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Mismatch of the eigenvalue set with its images under `z ↦ z*` and `z ↦ −z*`.
pub fn check_spectral_symmetries(eigenvalues: &[Complex64], tol: f64) -> SymmetryReport {
    let conj: Vec<Complex64> = eigenvalues.iter().map(|z| z.conj()).collect();
    let refl: Vec<Complex64> = eigenvalues.iter().map(|z| -z.conj()).collect();
    let conjugation_mismatch = hausdorff(eigenvalues, &conj);
    let reflection_mismatch = hausdorff(eigenvalues, &refl);
    SymmetryReport {
        conjugation_mismatch,
        reflection_mismatch,
        tol,
        within_tol: conjugation_mismatch <= tol && reflection_mismatch <= tol,
    }
}

pub fn kappa_ham_direct_vs_formula(
    counts: &PencilCounts,
    report: &IndexReport,
    classified: &[ClassifiedEigenvalue],
) -> IdentityCheck {
    let agree = report.kappa_ham == Some(counts.kappa_ham_direct);
    let detail = if agree {
        format!("{} = {}", counts.kappa_ham_direct, counts.kappa_ham_direct)
    } else {
        let listing: Vec<String> = classified
            .iter()
            .filter(|e| !matches!(e.class, EigenClass::RealPositive | EigenClass::RealNegative) || e.krein_negative == Some(true))
            .map(|e| format!("{:?} {:+.6e}{:+.6e}i", e.class, e.re, e.im))
            .collect();
        format!(
            "direct {} (imag+ {}, quadrant I {}, Krein-negative real+ {}) vs formula {:?}; unstable or Krein-negative eigenvalues: [{}]",
            counts.kappa_ham_direct,
            counts.kappa_imag_pos,
            counts.kappa_quadrant_i,
            counts.kappa_real_pos_neg_krein,
            report.kappa_ham,
            listing.join(", ")
        )
    };
    IdentityCheck { agree, kappa_ham_direct: counts.kappa_ham_direct, kappa_ham_formula: report.kappa_ham, detail }
}

/// `J·L` as a dense complex matrix for a real symmetric `l` and an arbitrary
/// (possibly non-diagonal) real signature `j`; for small hand-built models.
pub fn dense_pencil(l: &DMatrix<f64>, j: &DMatrix<f64>) -> DMatrix<Complex64> {
    (j * l).map(|v| Complex64::new(v, 0.0))
}

/// Convenience: quadratic form `⟨Lv, v⟩`.
pub fn krein_form(l: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    v.dotc(&(l * v)).re
}
