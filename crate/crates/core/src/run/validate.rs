//! The Fourier pencil `𝒥𝓛` and the validation checks that tie it to the
//! finite-difference analysis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KreinError, Result};
use crate::index::{compute_d_krein_l2, kappa_ham_formula};
use crate::krein_fourier::{
    assemble_j, assemble_l, assemble_pencil, FourierGrid, HermitianDense, SignatureDiag,
};
use crate::pencil::{
    check_spectral_symmetries, classify_spectrum, kappa_ham_direct_vs_formula, kernel_exactify_with,
    ClassifiedEigenvalue, EigenClass,
};
use crate::potentials::{Potential, ProblemParams};
use crate::report::{Analysis, Check, PencilSection, ValidationSection};
use crate::spectra::{eig_general, eig_hermitian};

use super::config::{Fault, RunConfig};

/// Spectral symmetry tolerance relative to `2bc`.
pub const SYMMETRY_TOL: f64 = 1e-7;
/// Relative agreement required between `𝐃` and `D_V` on the same Fourier grid.
pub const MATCHED_IDENTITY_TOL: f64 = 1e-8;
/// Gap half-width shrinkage for the free problem, relative to `2bc`.
pub const GAP_EPS: f64 = 1e-6;
/// Allowed relative distance of `min σ(𝓛₀)` from `2bc`.
pub const FREE_MIN_TOL: f64 = 1e-2;

/// `D_V = ⟨H⁺ψ₀′, ψ₀′⟩/‖ψ₀‖²` on the Fourier grid itself, from
/// `H = |Λ|^{1/2} L |Λ|^{1/2}` in plain Fourier coefficients. `None` without a kernel.
pub fn fourier_d_v(l: &HermitianDense, fg: &FourierGrid, params: ProblemParams, kernel_tol: f64) -> Result<Option<f64>> {
    let lambdas = fg.wavenumbers();
    let roots: Vec<f64> = lambdas.iter().map(|l| l.abs().sqrt()).collect();
    let m = fg.dim();
    let h = HermitianDense::new(DMatrix::from_fn(m, m, |i, j| l.matrix()[(i, j)] * (roots[i] * roots[j])))?;
    let spectrum = eig_hermitian(&h, params, kernel_tol)?;
    let kernel = spectrum.detect_kernel()?;
    let Some(psi) = kernel.vector() else {
        return Ok(None);
    };
    // ψ₀′ has coefficients iλψ̂; the factor i drops out of the quadratic form.
    let w = DVector::from_iterator(m, psi.iter().zip(&lambdas).map(|(z, &l)| z * l));
    let x = spectrum.apply_pseudo_inverse(&kernel, &w)?;
    Ok(Some(w.dotc(&x).re / psi.norm_squared()))
}

pub struct PencilOutput {
    pub section: PencilSection,
    pub classified: Vec<ClassifiedEigenvalue>,
    /// Fourier-side index formula `κ₋(𝓛) − κ₋(𝐃)`.
    pub fourier_formula: Option<usize>,
    pub fourier_formula_error: Option<String>,
    pub d_krein_error: Option<String>,
    pub potential_vanishes: bool,
}

fn is_notable(e: &ClassifiedEigenvalue, threshold: f64) -> bool {
    match e.class {
        EigenClass::RealPositive | EigenClass::RealNegative => e.krein_negative == Some(true) || e.re.abs() < threshold,
        _ => true,
    }
}

/// Builds and classifies the pencil; `exactify` applies the rank-one kernel
/// correction first.
pub fn run_pencil(cfg: &RunConfig, p: &Potential, exactify: bool) -> Result<PencilOutput> {
    let params = cfg.params()?;
    let fg = FourierGrid::new(cfg.grid.half_width, cfg.grid.n_fourier)?;
    let fourier_potential = match cfg.fault {
        Fault::PerturbFourierPotential => Potential::scaled(p.clone(), 1.5),
        _ => p.clone(),
    };
    let potential_vanishes = fg.nodes().iter().all(|&x| fourier_potential.eval(x) == 0.0);
    let l_raw = assemble_l(&fourier_potential, params, &fg);
    let raw_spectrum = eig_hermitian(&l_raw, params, cfg.kernel_tol())?;
    let (l, spectrum, removed) = if exactify {
        let removed = raw_spectrum.detect_kernel()?.raw_eigenvalue;
        let (l, s) = kernel_exactify_with(&l_raw, &raw_spectrum, params)?;
        (l, s, removed)
    } else {
        (l_raw, raw_spectrum, None)
    };
    let kernel = spectrum.detect_kernel()?;
    let mut j = assemble_j(&fg);
    if cfg.fault == Fault::FlipSignature {
        let mut signs = j.signs().to_vec();
        let plus_one = fg.mode_labels().iter().position(|&k| k == 1).expect("mode +1 is always retained");
        signs[plus_one] = -signs[plus_one];
        j = SignatureDiag::new(signs)?;
    }
    // A corrupted signature can push Jψ₀ out of the range of L; that is a
    // validation failure, not a numerical one.
    let (d_krein, d_krein_error) = if kernel.dimension == 1 {
        match compute_d_krein_l2(&spectrum, &kernel, &j, &fg) {
            Ok(d) => (Some(if cfg.fault == Fault::NegateD { -d } else { d }), None),
            Err(e @ KreinError::NotInRange { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let kappa_minus_l = spectrum.count_negative();
    let d_v_fourier = fourier_d_v(&l, &fg, params, cfg.kernel_tol())?;

    let a = assemble_pencil(&l, &j)?;
    let cs = eig_general(&a)?;
    let classification = classify_spectrum(&cs, &l, params, cfg.tol_class(), cfg.zero_window())?;
    let mut values: Vec<Complex64> = cs.eigenvalues.clone();
    if cfg.fault == Fault::BreakSymmetry {
        if let Some(last) = values.iter_mut().max_by(|a, b| a.re.total_cmp(&b.re)) {
            *last += Complex64::new(0.0, 0.1);
        }
    }
    let symmetry = check_spectral_symmetries(&values, SYMMETRY_TOL * params.threshold());

    // Degeneracy of 𝐃 is judged on the same relative scale as D_V.
    let degeneracy = cfg.tolerances.degeneracy_tol.unwrap_or(crate::index::DEGENERACY_FACTOR);
    let (fourier_formula, fourier_formula_error) = match &d_krein_error {
        Some(e) => (None, Some(format!("D unavailable: {e}"))),
        None => match kappa_ham_formula(kappa_minus_l, kernel.dimension, d_krein, degeneracy) {
            Ok(r) => (r.kappa_ham, None),
            Err(e) => (None, Some(e.to_string())),
        },
    };

    let threshold = params.threshold();
    let section = PencilSection {
        n_modes: fg.n_modes(),
        dimension: fg.dim(),
        exactified: exactify,
        removed_eigenvalue: removed,
        kappa_minus_l,
        kernel_dim_l: kernel.dimension,
        min_eigenvalue_l: spectrum.eigenvalues()[0],
        d_krein,
        d_v_fourier,
        counts: classification.counts,
        symmetry,
        max_residual: cs.residuals.iter().copied().fold(0.0, f64::max),
        notable_eigenvalues: classification.eigenvalues.iter().filter(|e| is_notable(e, threshold)).cloned().collect(),
        diagnostics: classification.diagnostics,
    };
    Ok(PencilOutput {
        section,
        classified: classification.eigenvalues,
        fourier_formula,
        fourier_formula_error,
        d_krein_error,
        potential_vanishes,
    })
}

/// Every check comparing the pencil with the finite-difference analysis.
pub fn validation_checks(cfg: &RunConfig, analysis: &Analysis, pencil: &PencilOutput) -> Result<ValidationSection> {
    let params = cfg.params()?;
    let threshold = params.threshold();
    let s = &pencil.section;
    let mut checks = Vec::new();

    checks.push(Check::new(
        "kappa_minus_agreement",
        analysis.index.kappa_minus == s.kappa_minus_l,
        format!("finite differences {} vs Fourier {}", analysis.index.kappa_minus, s.kappa_minus_l),
    ));

    if analysis.index.kappa_ham.is_some() {
        let id = kappa_ham_direct_vs_formula(&s.counts, &analysis.index, &pencil.classified);
        checks.push(Check::new("index_identity", id.agree, id.detail));
    } else {
        checks.push(Check::not_applicable("index_identity", "kappa_Ham undefined: D_V vanishes within tolerance".into()));
    }

    match (pencil.fourier_formula, &pencil.fourier_formula_error) {
        (_, Some(err)) => checks.push(Check::new("index_identity_fourier", false, err.clone())),
        (Some(f), None) => checks.push(Check::new(
            "index_identity_fourier",
            f == s.counts.kappa_ham_direct,
            format!("direct {} vs kappa_minus(L) - kappa_minus(D) = {f}", s.counts.kappa_ham_direct),
        )),
        (None, None) => checks.push(Check::not_applicable("index_identity_fourier", "D vanishes within tolerance".into())),
    }

    checks.push(Check::new(
        "pontryagin_bound",
        s.counts.kappa_c_plus <= s.kappa_minus_l,
        format!("kappa_c_plus {} <= kappa_minus(L) {}", s.counts.kappa_c_plus, s.kappa_minus_l),
    ));

    checks.push(Check::new(
        "spectral_symmetry",
        s.symmetry.within_tol,
        format!(
            "conjugation {:.3e}, reflection {:.3e}, tolerance {:.3e}",
            s.symmetry.conjugation_mismatch, s.symmetry.reflection_mismatch, s.symmetry.tol
        ),
    ));

    if let Some(e) = &pencil.d_krein_error {
        checks.push(Check::new("krein_range", false, e.clone()));
    }
    match (s.d_krein, s.d_v_fourier) {
        (Some(d), Some(dv)) => {
            let err = (d - dv).abs();
            checks.push(Check::new(
                "matched_identity",
                err <= MATCHED_IDENTITY_TOL * dv.abs(),
                format!("D {d:.12e} vs D_V on the same Fourier grid {dv:.12e}, difference {err:.3e}"),
            ));
        }
        _ => checks.push(Check::not_applicable("matched_identity", "D or the Fourier kernel is unavailable".into())),
    }

    match (s.d_krein, analysis.index.d_v) {
        (Some(d), Some(dv)) => {
            let err = (d - dv).abs();
            checks.push(Check::new(
                "cross_formula",
                err <= cfg.cross_formula_tol() * dv.abs(),
                format!("D (Fourier) {d:.9e} vs D_V (finite differences) {dv:.9e}, difference {err:.3e}"),
            ));
        }
        (None, None) => checks.push(Check::not_applicable("cross_formula", "neither discretization has a kernel".into())),
        (d, dv) => checks.push(Check::not_applicable(
            "cross_formula",
            format!("kernel found by only one discretization (Fourier D {d:?}, finite-difference D_V {dv:?})"),
        )),
    }

    checks.push(Check::new(
        "bounds",
        analysis.bounds.holds(),
        format!(
            "kappa_minus {} with kernel {} vs Bargmann {:?}, Birman-Schwinger {:.6}",
            analysis.bounds.kappa_minus_observed,
            analysis.bounds.kernel_dim,
            analysis.bounds.bargmann,
            analysis.bounds.birman_schwinger
        ),
    ));

    if pencil.potential_vanishes {
        let edge = threshold * (1.0 - GAP_EPS);
        let inside: Vec<String> = pencil
            .classified
            .iter()
            .filter(|e| e.z().norm() < edge)
            .map(|e| format!("{:+.6e}{:+.6e}i", e.re, e.im))
            .collect();
        let min_rel = (s.min_eigenvalue_l - threshold).abs() / threshold;
        checks.push(Check::new(
            "free_gap",
            inside.is_empty() && min_rel <= FREE_MIN_TOL,
            format!(
                "{} eigenvalue(s) inside the gap [{}]; min eigenvalue of L {:.9e} ({:.3e} relative to 2bc)",
                inside.len(),
                inside.join(", "),
                s.min_eigenvalue_l,
                min_rel
            ),
        ));
    } else {
        checks.push(Check::not_applicable("free_gap", "potential does not vanish".into()));
    }

    let passed = checks.iter().all(|c| c.status != crate::report::CheckStatus::Fail);
    Ok(ValidationSection { passed, fault: cfg.fault, checks })
}
