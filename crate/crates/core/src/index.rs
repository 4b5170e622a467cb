//! `D_V`, its Krein-space counterpart `𝐃`, the index formula
//! `κ_Ham = κ₋(H_V) − κ₋(D_V)`, the resulting verdict, and Jordan chains of
//! `H_V − zD` at `z = 0`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein_fourier::{l2_norm_squared, FourierGrid, SignatureDiag};
use crate::schrodinger_fd::{apply_derivative, Grid};
use crate::spectra::{KernelInfo, SpectrumResult, ORTH_TOL};

/// `|⟨ψ₀′, ψ₀⟩|` allowed relative to `‖ψ₀′‖‖ψ₀‖`.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Relative factor in the default degeneracy tolerance `1e−6 ‖ψ₀′‖²/(2bc)`.
pub const DEGENERACY_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    DegenerateDV,
    NoNegativeSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub kappa_minus: usize,
    pub kernel_dim: usize,
    pub d_v: Option<f64>,
    pub kappa_minus_d: Option<usize>,
    pub kappa_ham: Option<usize>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Vectors `ψ₀, ψ₁, …` with `H ψ_{k} = ψ_{k−1}′`, plus the residual of each relation.
#[derive(Debug, Clone)]
pub struct JordanChain {
    pub vectors: Vec<DVector<f64>>,
    /// `‖Hψ_k − ψ_{k−1}′‖ / ‖ψ_{k−1}′‖` for `k ≥ 1`.
    pub residuals: Vec<f64>,
}

impl JordanChain {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn kernel_vector<'a, T: crate::spectra::Scalar>(k: &'a KernelInfo<T>, s: &SpectrumResult<T>) -> Result<&'a DVector<T>> {
    k.vector().ok_or(KreinError::KernelAbsent { window: s.kernel_window() })
}

/// `h ⟨H⁺ψ₀′, ψ₀′⟩` with `ψ₀` normalized in `L²`.
pub fn compute_dv(h_spectrum: &SpectrumResult<f64>, k: &KernelInfo<f64>, g: &Grid) -> Result<f64> {
    compute_dv_with(h_spectrum, k, g.spacing(), |v| {
        apply_derivative(g, v.as_slice()).map(DVector::from_vec)
    })
}

/// [`compute_dv`] for an arbitrary derivative and quadrature weight.
pub fn compute_dv_with<F>(s: &SpectrumResult<f64>, k: &KernelInfo<f64>, weight: f64, derivative: F) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let psi0 = kernel_vector(k, s)? / weight.sqrt();
    let w = derivative(&psi0)?;
    check_orthogonal(&w, &psi0)?;
    let x = s.apply_pseudo_inverse(k, &w)?;
    Ok(weight * x.dot(&w))
}

fn check_orthogonal(w: &DVector<f64>, psi0: &DVector<f64>) -> Result<()> {
    let scale = w.norm() * psi0.norm();
    let defect = if scale > 0.0 { w.dot(psi0).abs() / scale } else { 0.0 };
    if defect > ORTHOGONALITY_TOL {
        return Err(KreinError::OrthogonalityDefect { defect });
    }
    Ok(())
}

/// `⟨L⁺Jψ₀, Jψ₀⟩` for the unit kernel vector in the coefficient basis.
pub fn compute_d_krein(
    l_spectrum: &SpectrumResult<Complex64>,
    k: &KernelInfo<Complex64>,
    j: &SignatureDiag,
) -> Result<f64> {
    let psi0 = kernel_vector(k, l_spectrum)?;
    let jpsi = j.apply(psi0)?;
    let x = l_spectrum.apply_pseudo_inverse(k, &jpsi)?;
    Ok(jpsi.dotc(&x).re)
}

/// [`compute_d_krein`] rescaled to a kernel function of unit `L²` norm, which
/// is the normalization [`compute_dv`] uses.
pub fn compute_d_krein_l2(
    l_spectrum: &SpectrumResult<Complex64>,
    k: &KernelInfo<Complex64>,
    j: &SignatureDiag,
    fg: &FourierGrid,
) -> Result<f64> {
    let raw = compute_d_krein(l_spectrum, k, j)?;
    let norm = l2_norm_squared(fg, kernel_vector(k, l_spectrum)?)?;
    Ok(raw / norm)
}

/// `1e−6 ‖ψ₀′‖²_{L²} / (2bc)` for the detected kernel.
pub fn default_degeneracy_tol(h_spectrum: &SpectrumResult<f64>, k: &KernelInfo<f64>, g: &Grid) -> Result<f64> {
    let h = g.spacing();
    let psi0 = kernel_vector(k, h_spectrum)? / h.sqrt();
    let w = apply_derivative(g, psi0.as_slice())?;
    let norm_sq: f64 = h * w.iter().map(|v| v * v).sum::<f64>();
    Ok(DEGENERACY_FACTOR * norm_sq / h_spectrum.reference_scale())
}

pub fn kappa_ham_formula(
    kappa_minus: usize,
    kernel_dim: usize,
    d_v: Option<f64>,
    degeneracy_tol: f64,
) -> Result<IndexReport> {
    if kernel_dim > 1 {
        return Err(KreinError::InvalidInput(format!("kernel dimension {kernel_dim} exceeds 1")));
    }
    if (kernel_dim == 1) != d_v.is_some() {
        return Err(KreinError::InvalidInput("d_v must be given exactly when the kernel is nontrivial".into()));
    }
    if !(degeneracy_tol.is_finite() && degeneracy_tol >= 0.0) {
        return Err(KreinError::InvalidInput(format!("invalid degeneracy tolerance {degeneracy_tol}")));
    }
    let mut notes = Vec::new();
    let kappa_minus_d = match d_v {
        None => None,
        Some(d) if !d.is_finite() => {
            return Err(KreinError::InvalidInput(format!("d_v is not finite ({d})")));
        }
        Some(d) if d.abs() <= degeneracy_tol => None,
        Some(d) => Some(usize::from(d < 0.0)),
    };
    if let Some(kd) = kappa_minus_d {
        if kd > kappa_minus {
            return Err(KreinError::InvalidInput(format!(
                "negative D_V with no negative spectrum (kappa_minus = {kappa_minus}) is inconsistent"
            )));
        }
    }

    let kappa_ham = match (kernel_dim, kappa_minus_d) {
        (0, _) => Some(kappa_minus),
        (_, Some(kd)) => Some(kappa_minus - kd),
        (_, None) => None,
    };

    let verdict = match kappa_ham {
        None => {
            notes.push("D_V vanishes within tolerance: kappa_Ham undefined, Jordan chain at zero has length >= 3".into());
            Verdict::DegenerateDV
        }
        Some(_) if kappa_minus == 0 => Verdict::NoNegativeSpectrum,
        Some(0) => Verdict::Stable,
        Some(_) => Verdict::Unstable,
    };

    if kernel_dim == 0 && kappa_minus >= 1 {
        notes.push("trivial kernel: every negative eigenvalue of H_V contributes to kappa_Ham".into());
    }
    if let (Some(d), Some(_)) = (d_v, kappa_minus_d) {
        if kappa_minus >= 1 && ((!kappa_minus.is_multiple_of(2) && d > 0.0) || (kappa_minus.is_multiple_of(2) && d < 0.0)) {
            if kappa_minus == 1 {
                notes.push("one purely imaginary eigenvalue expected on the positive imaginary axis".into());
            } else {
                notes.push("at least one purely imaginary eigenvalue expected".into());
            }
        }
    }
    Ok(IndexReport { kappa_minus, kernel_dim, d_v, kappa_minus_d, kappa_ham, verdict, notes })
}

/// Chain `ψ_{k+1} = H⁺ψ_k′` on the FD grid, `ψ₀` of unit `L²` norm.
pub fn jordan_chain_at_zero(
    h_spectrum: &SpectrumResult<f64>,
    k: &KernelInfo<f64>,
    g: &Grid,
    max_len: usize,
    orth_tol: f64,
) -> Result<JordanChain> {
    jordan_chain_with(h_spectrum, k, g.spacing(), max_len, orth_tol, |v| {
        apply_derivative(g, v.as_slice()).map(DVector::from_vec)
    })
}

/// Default range tolerance for [`jordan_chain_at_zero`].
pub const CHAIN_ORTH_TOL: f64 = ORTH_TOL;

/// [`jordan_chain_at_zero`] for an arbitrary derivative and quadrature weight.
pub fn jordan_chain_with<F>(
    s: &SpectrumResult<f64>,
    k: &KernelInfo<f64>,
    weight: f64,
    max_len: usize,
    orth_tol: f64,
    derivative: F,
) -> Result<JordanChain>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    if max_len == 0 {
        return Err(KreinError::InvalidInput("max_len must be positive".into()));
    }
    let psi0 = kernel_vector(k, s)? / weight.sqrt();
    let unit_kernel = kernel_vector(k, s)?;
    let mut vectors = vec![psi0.clone()];
    let mut residuals = Vec::new();
    while vectors.len() < max_len {
        let last = vectors.last().expect("chain is never empty");
        let w = derivative(last)?;
        let w_norm = w.norm();
        if w.dot(&psi0).abs() > orth_tol * w_norm * psi0.norm() {
            break;
        }
        // Remove the admissible sliver of kernel component before inverting.
        let w_range = &w - unit_kernel * unit_kernel.dot(&w);
        let next = s.apply_pseudo_inverse(k, &w_range)?;
        let applied = apply_spectral(s, &next);
        let residual = if w_norm > 0.0 { (applied - &w).norm() / w_norm } else { 0.0 };
        residuals.push(residual);
        vectors.push(next);
    }
    Ok(JordanChain { vectors, residuals })
}

/// `V Λ Vᵀ x`.
fn apply_spectral(s: &SpectrumResult<f64>, x: &DVector<f64>) -> DVector<f64> {
    let mut c = s.eigenvectors().tr_mul(x);
    for (ci, &l) in c.iter_mut().zip(s.eigenvalues()) {
        *ci *= l;
    }
    s.eigenvectors() * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein_fourier::SignatureDiag;
    use crate::potentials::ProblemParams;
    use crate::spectra::{detect_kernel, eig_hermitian};
    use nalgebra::DMatrix;

    fn unit() -> ProblemParams {
        ProblemParams::new(1.0, 1.0).unwrap()
    }

    fn spectrum(values: &[f64]) -> (SpectrumResult<f64>, KernelInfo<f64>) {
        let m = DMatrix::from_diagonal(&DVector::from_row_slice(values));
        let s = eig_hermitian(&m, unit(), 1e-6).unwrap();
        let k = detect_kernel(&s).unwrap();
        (s, k)
    }

    #[test]
    fn synthetic_dv_is_one() {
        let (s, k) = spectrum(&[0.0, 1.0, 2.0]);
        let shift = |v: &DVector<f64>| Ok(DVector::from_vec(vec![0.0, v[0], 0.0]));
        // shift is not antisymmetric but sends e1 to e2, which is all the formula needs
        assert!((compute_dv_with(&s, &k, 1.0, shift).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dv_needs_a_kernel() {
        let (s, k) = spectrum(&[1.0, 2.0, 3.0]);
        let id = |v: &DVector<f64>| Ok(v.clone());
        assert!(matches!(compute_dv_with(&s, &k, 1.0, id), Err(KreinError::KernelAbsent { .. })));
    }

    #[test]
    fn orthogonality_defect_is_reported() {
        let (s, k) = spectrum(&[0.0, 1.0, 2.0]);
        let leaky = |v: &DVector<f64>| Ok(DVector::from_vec(vec![v[0], v[0], 0.0]));
        assert!(matches!(compute_dv_with(&s, &k, 1.0, leaky), Err(KreinError::OrthogonalityDefect { .. })));
    }

    #[test]
    fn dv_scales_with_weight_convention() {
        // ψ₀ = e₁/√h, so D_V = h·⟨H⁺ e₂/√h, e₂/√h⟩ = 1 for every weight.
        let (s, k) = spectrum(&[0.0, 1.0, 2.0]);
        let shift = |v: &DVector<f64>| Ok(DVector::from_vec(vec![0.0, v[0], 0.0]));
        for h in [0.01, 0.5, 3.0] {
            assert!((compute_dv_with(&s, &k, h, shift).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn krein_d_rejects_kernel_direction() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let s = eig_hermitian(&m, unit(), 1e-6).unwrap();
        let k = detect_kernel(&s).unwrap();
        let j = SignatureDiag::new(vec![1, -1, 1]).unwrap();
        assert!(matches!(compute_d_krein(&s, &k, &j), Err(KreinError::NotInRange { .. })));
    }

    #[test]
    fn krein_d_on_a_two_mode_model() {
        // L has kernel (1, 1)/√2; J(1,1) = (1,−1) is orthogonal to it.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        );
        let s = eig_hermitian(&m, unit(), 1e-6).unwrap();
        let k = detect_kernel(&s).unwrap();
        let j = SignatureDiag::new(vec![1, -1]).unwrap();
        // Jψ₀ = (1,−1)/√2 is the eigenvector for 2, so 𝐃 = 1/2
        assert!((compute_d_krein(&s, &k, &j).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn formula_cases() {
        let r = kappa_ham_formula(1, 1, Some(-0.3), 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.kappa_minus_d, r.verdict), (Some(0), Some(1), Verdict::Stable));

        let r = kappa_ham_formula(1, 1, Some(0.25), 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.verdict), (Some(1), Verdict::Unstable));
        assert!(r.notes.iter().any(|n| n.contains("one purely imaginary eigenvalue")));

        let r = kappa_ham_formula(2, 0, None, 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.verdict), (Some(2), Verdict::Unstable));

        let r = kappa_ham_formula(2, 1, Some(-1.0), 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.verdict), (Some(1), Verdict::Unstable));
        assert!(r.notes.iter().any(|n| n.contains("at least one purely imaginary")));

        let r = kappa_ham_formula(2, 1, Some(1e-12), 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.kappa_minus_d, r.verdict), (None, None, Verdict::DegenerateDV));

        let r = kappa_ham_formula(0, 0, None, 1e-8).unwrap();
        assert_eq!((r.kappa_ham, r.verdict), (Some(0), Verdict::NoNegativeSpectrum));

        assert!(kappa_ham_formula(1, 1, None, 1e-8).is_err());
        assert!(kappa_ham_formula(1, 0, Some(1.0), 1e-8).is_err());
        assert!(kappa_ham_formula(1, 2, Some(1.0), 1e-8).is_err());
        assert!(kappa_ham_formula(0, 1, Some(-1.0), 1e-8).is_err());
    }

    #[test]
    fn formula_sign_invariance_under_scaling() {
        for alpha in [0.1, 2.0, 17.0] {
            let d = 0.25;
            let a = kappa_ham_formula(1, 1, Some(d), 1e-9).unwrap();
            let b = kappa_ham_formula(1, 1, Some(alpha * alpha * d), 1e-9).unwrap();
            assert_eq!((a.kappa_ham, a.verdict), (b.kappa_ham, b.verdict));
        }
    }

    #[test]
    fn synthetic_chain_of_length_two() {
        let (s, k) = spectrum(&[0.0, 1.0, 2.0]);
        // antisymmetric K with K e₁ = e₂
        let kmat = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let chain = jordan_chain_with(&s, &k, 1.0, 10, CHAIN_ORTH_TOL, |v| Ok(&kmat * v)).unwrap();
        assert_eq!(chain.len(), 2);
        assert!(chain.residuals[0] < 1e-14);
    }

    #[test]
    fn synthetic_chain_with_vanishing_d() {
        // H = diag(0, 1, −1, 2), K e₁ = e₂ + e₃, K e₂ = e₄: D = 1 − 1 = 0.
        let (s, k) = spectrum(&[0.0, 1.0, -1.0, 2.0]);
        let mut kmat = DMatrix::<f64>::zeros(4, 4);
        for (i, j) in [(1, 0), (2, 0), (3, 1)] {
            kmat[(i, j)] = 1.0;
            kmat[(j, i)] = -1.0;
        }
        let dv = compute_dv_with(&s, &k, 1.0, |v| Ok(&kmat * v)).unwrap();
        assert!(dv.abs() < 1e-15);
        let chain = jordan_chain_with(&s, &k, 1.0, 3, CHAIN_ORTH_TOL, |v| Ok(&kmat * v)).unwrap();
        assert_eq!(chain.len(), 3);
        let long = jordan_chain_with(&s, &k, 1.0, 10, CHAIN_ORTH_TOL, |v| Ok(&kmat * v)).unwrap();
        assert_eq!(long.len(), 4);
        assert!(long.residuals.iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn chain_requires_kernel() {
        let (s, k) = spectrum(&[1.0, 2.0]);
        assert!(jordan_chain_with(&s, &k, 1.0, 3, 1e-6, |v| Ok(v.clone())).is_err());
    }
}
