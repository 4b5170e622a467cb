//! The analysis workflow: potential checks, the finite-difference spectrum of
//! `H_V`, kernel, `D_V`, the index formula, bounds and a Fourier `κ₋` cross-check.

use crate::bounds::BoundsReport;
use crate::error::Result;
use crate::index::{
    compute_dv, default_degeneracy_tol, jordan_chain_at_zero, kappa_ham_formula, CHAIN_ORTH_TOL,
};
use crate::krein_fourier::{assemble_l, FourierGrid};
use crate::potentials::{decay_defect, m_v, Potential, ProblemParams};
use crate::report::{Analysis, ChainSummary, PotentialChecks, Sharpening, SpectrumSummary};
use crate::schrodinger_fd::{assemble_h, Grid};
use crate::spectra::{eig_hermitian, tridiagonal_eigenvalues, HermitianMatrix, SpectrumResult};

use super::config::RunConfig;

/// Largest relative amplitude change accepted when sharpening.
const MAX_AMPLITUDE_SHIFT: f64 = 0.05;
const SHARPEN_ITERATIONS: usize = 60;
/// Sharpened eigenvalues must land within this fraction of the kernel window.
const SHARPEN_TARGET: f64 = 1e-6;

pub struct AnalysisOutput {
    pub analysis: Analysis,
    pub fd_eigenvalues: Vec<f64>,
    pub fourier_eigenvalues: Vec<f64>,
    /// Potential actually used on the finite-difference grid.
    pub fd_potential: Potential,
}

fn eigenvalue_at(p: &Potential, params: ProblemParams, g: &Grid, amplitude: f64, position: usize) -> Result<f64> {
    let h = assemble_h(&Potential::scaled(p.clone(), amplitude), params, g);
    Ok(tridiagonal_eigenvalues(&h, position, position)?[0])
}

/// Secant iteration on the amplitude `a` of `a·V` driving eigenvalue
/// `position` to zero, started from the first-order estimate
/// `dλ/da = ⟨ψ, Vψ⟩`. `None` when it does not settle close to `a = 1`.
fn sharpen_amplitude(
    p: &Potential,
    params: ProblemParams,
    g: &Grid,
    s: &SpectrumResult<f64>,
    position: usize,
) -> Result<Option<(f64, f64)>> {
    let lambda0 = s.eigenvalues()[position];
    let v = s.eigenvectors().column(position);
    let slope: f64 = g.nodes().iter().zip(v.iter()).map(|(&x, &c)| c * c * p.eval(x)).sum();
    if slope == 0.0 || !slope.is_finite() {
        return Ok(None);
    }
    let target = SHARPEN_TARGET * s.kernel_window();
    let (mut a0, mut f0) = (1.0, lambda0);
    let mut a1 = 1.0 - lambda0 / slope;
    for _ in 0..SHARPEN_ITERATIONS {
        if (a1 - 1.0).abs() > MAX_AMPLITUDE_SHIFT {
            return Ok(None);
        }
        let f1 = eigenvalue_at(p, params, g, a1, position)?;
        if f1.abs() <= target {
            return Ok(Some((a1, f1)));
        }
        if f1 == f0 {
            return Ok(None);
        }
        let next = a1 - f1 * (a1 - a0) / (f1 - f0);
        (a0, f0, a1) = (a1, f1, next);
    }
    Ok(None)
}

/// Looks for a single eigenvalue just outside the kernel window and, when
/// `factor > 0` allows it, rescales the potential to put it on zero.
fn maybe_sharpen(
    p: &Potential,
    params: ProblemParams,
    g: &Grid,
    s: &SpectrumResult<f64>,
    factor: f64,
) -> Result<Option<Sharpening>> {
    let window = s.kernel_window();
    if factor <= 1.0 || !s.kernel_candidates().is_empty() {
        return Ok(None);
    }
    let near: Vec<usize> = (0..s.eigenvalues().len())
        .filter(|&i| {
            let l = s.eigenvalues()[i].abs();
            l > window && l <= factor * window
        })
        .collect();
    let [position] = near.as_slice() else {
        return Ok(None);
    };
    let raw = s.eigenvalues()[*position];
    Ok(sharpen_amplitude(p, params, g, s, *position)?.map(|(amplitude, sharpened)| Sharpening {
        amplitude,
        position: *position,
        raw_eigenvalue: raw,
        sharpened_eigenvalue: sharpened,
        note: format!(
            "eigenvalue {raw:.6e} sat outside the kernel window {window:.3e}; the finite-difference potential was rescaled by {amplitude:.12} to make it a kernel"
        ),
    }))
}

pub fn analyze_potential(cfg: &RunConfig, p: &Potential) -> Result<AnalysisOutput> {
    let params = cfg.params()?;
    let x = cfg.grid.half_width;
    let g = Grid::new(x, cfg.grid.n_fd)?;
    let kernel_tol = cfg.kernel_tol();
    let mut notes = Vec::new();

    let potential_checks =
        PotentialChecks { m_v: m_v(p, x), decay_defect: decay_defect(p, 0.5 * x, x), tail: [0.5 * x, x] };

    let mut spectrum = eig_hermitian(&assemble_h(p, params, &g), params, kernel_tol)?;
    let sharpening = maybe_sharpen(p, params, &g, &spectrum, cfg.sharpen_factor())?;
    let fd_potential = match &sharpening {
        Some(sh) => {
            notes.push(sh.note.clone());
            let scaled = Potential::scaled(p.clone(), sh.amplitude);
            spectrum = eig_hermitian(&assemble_h(&scaled, params, &g), params, kernel_tol)?;
            scaled
        }
        None => p.clone(),
    };
    let kernel = spectrum.detect_kernel()?;
    let kappa_minus = spectrum.count_negative();

    let (d_v, degeneracy_tol, jordan_chain) = if kernel.dimension == 1 {
        let d_v = compute_dv(&spectrum, &kernel, &g)?;
        let tol = match cfg.tolerances.degeneracy_tol {
            Some(t) => t,
            None => default_degeneracy_tol(&spectrum, &kernel, &g)?,
        };
        let chain = jordan_chain_at_zero(&spectrum, &kernel, &g, cfg.max_chain_len, CHAIN_ORTH_TOL)?;
        (Some(d_v), Some(tol), Some(ChainSummary { length: chain.len(), residuals: chain.residuals }))
    } else {
        (None, None, None)
    };
    let index = kappa_ham_formula(kappa_minus, kernel.dimension, d_v, degeneracy_tol.unwrap_or(0.0))?;
    let bounds = BoundsReport::new(&fd_potential, params, x, kappa_minus, kernel.dimension);
    let fd = SpectrumSummary::from_values(
        "finite_difference",
        spectrum.eigenvalues(),
        params.schrodinger_threshold(),
        spectrum.kernel_window(),
    );

    let fg = FourierGrid::new(x, cfg.grid.n_fourier)?;
    let fourier_eigenvalues = HermitianMatrix::eigenvalues(&assemble_l(p, params, &fg))?;
    let fourier =
        SpectrumSummary::from_values("fourier", &fourier_eigenvalues, params.threshold(), kernel_tol * params.threshold());
    let kappa_minus_agree = fourier.kappa_minus == kappa_minus;
    if !kappa_minus_agree {
        notes.push(format!(
            "kappa_minus differs between discretizations: finite differences {kappa_minus}, Fourier {}",
            fourier.kappa_minus
        ));
    }
    if fourier.kernel_dim != kernel.dimension {
        notes.push(format!(
            "kernel dimension differs between discretizations: finite differences {}, Fourier {}",
            kernel.dimension, fourier.kernel_dim
        ));
    }

    Ok(AnalysisOutput {
        analysis: Analysis {
            potential_checks,
            sharpening,
            fd,
            fourier,
            kappa_minus_agree,
            index,
            degeneracy_tol,
            jordan_chain,
            bounds,
            notes,
        },
        fd_eigenvalues: spectrum.eigenvalues().to_vec(),
        fourier_eigenvalues,
        fd_potential,
    })
}
