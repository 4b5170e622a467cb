//! Kernel crossings of `H_{sV}` along the amplitude `s`.

use rayon::prelude::*;

use crate::error::{KreinError, Result};
use crate::potentials::{Potential, ProblemParams};
use crate::report::{Crossing, NetPoint, SweepSection};
use crate::schrodinger_fd::{assemble_h, Grid};
use crate::spectra::tridiagonal_eigenvalues;

use super::analyze::analyze_potential;
use super::config::{RunConfig, SweepConfig};

/// Adjacent eigenvalues closer than this are flagged as a possible branch crossing.
pub const GAP_TOL: f64 = 1e-8;
const MAX_BISECTIONS: usize = 200;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "KREIN_INDEX_THREADS";

struct BranchSample {
    lambda: f64,
    gap: Option<f64>,
}

fn branch_at(p: &Potential, params: ProblemParams, g: &Grid, s: f64, k: usize) -> Result<BranchSample> {
    let h = assemble_h(&Potential::scaled(p.clone(), s), params, g);
    let first = k.saturating_sub(1);
    let last = (k + 1).min(g.n_interior() - 1);
    let values = tridiagonal_eigenvalues(&h, first, last)?;
    let lambda = values[k - first];
    let gap = values.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    Ok(BranchSample { lambda, gap })
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| KreinError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| KreinError::Config(format!("thread pool: {e}")))
}

/// Bisects `[lo, hi]` (with `f(lo)·f(hi) < 0`) until `|λ_k| ≤ tol`.
fn bisect(
    p: &Potential,
    params: ProblemParams,
    g: &Grid,
    k: usize,
    (mut lo, mut f_lo): (f64, f64),
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64, usize, bool)> {
    for it in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = branch_at(p, params, g, mid, k)?.lambda;
        if f_mid.abs() <= tol {
            return Ok((mid, f_mid, it, true));
        }
        if mid <= lo || mid >= hi {
            return Ok((mid, f_mid, it, false));
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            (lo, f_lo) = (mid, f_mid);
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let f_mid = branch_at(p, params, g, mid, k)?.lambda;
    Ok((mid, f_mid, MAX_BISECTIONS, f_mid.abs() <= tol))
}

/// Net evaluation, bracketing and bisection only; no analysis at the crossings.
pub fn locate_crossings(p: &Potential, params: ProblemParams, g: &Grid, sw: &SweepConfig) -> Result<SweepSection> {
    let n = sw.net_points;
    let net_s: Vec<f64> =
        (0..n).map(|i| if i + 1 == n { sw.s_max } else { sw.s_min + (sw.s_max - sw.s_min) * i as f64 / (n - 1) as f64 }).collect();
    let samples: Vec<BranchSample> =
        pool()?.install(|| net_s.par_iter().map(|&s| branch_at(p, params, g, s, sw.branch)).collect::<Result<_>>())?;

    let mut gap_warnings = Vec::new();
    for (s, sample) in net_s.iter().zip(&samples) {
        if let Some(gap) = sample.gap.filter(|&gap| gap < GAP_TOL) {
            gap_warnings.push(format!("eigenvalue gap {gap:.3e} around branch {} at s = {s}", sw.branch));
        }
    }

    let tol = sw.tolerance * params.threshold();
    let mut crossings = Vec::new();
    for i in 0..n {
        let (s, f) = (net_s[i], samples[i].lambda);
        if f == 0.0 {
            crossings.push(Crossing {
                s,
                lambda: f,
                bracket: [s, s],
                iterations: 0,
                converged: true,
                analysis: None,
                analysis_error: None,
            });
            continue;
        }
        if i + 1 < n {
            let (s_next, f_next) = (net_s[i + 1], samples[i + 1].lambda);
            if f_next != 0.0 && (f < 0.0) != (f_next < 0.0) {
                let (s_star, lambda, iterations, converged) = bisect(p, params, g, sw.branch, (s, f), s_next, tol)?;
                crossings.push(Crossing {
                    s: s_star,
                    lambda,
                    bracket: [s, s_next],
                    iterations,
                    converged,
                    analysis: None,
                    analysis_error: None,
                });
            }
        }
    }
    let note = if crossings.is_empty() {
        format!("eigenvalue {} keeps one sign on [{}, {}]: no crossing", sw.branch, sw.s_min, sw.s_max)
    } else {
        format!("{} crossing(s) of eigenvalue {} located", crossings.len(), sw.branch)
    };
    Ok(SweepSection {
        branch: sw.branch,
        s_min: sw.s_min,
        s_max: sw.s_max,
        tolerance: sw.tolerance,
        net: net_s.iter().zip(&samples).map(|(&s, sm)| NetPoint { s, lambda: sm.lambda }).collect(),
        crossings,
        gap_warnings,
        note,
    })
}

/// Locates the crossings and runs the analysis at each one.
pub fn sweep(cfg: &RunConfig, p: &Potential) -> Result<SweepSection> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| KreinError::Config("sweep mode needs a [sweep] table".into()))?;
    let params = cfg.params()?;
    let g = Grid::new(cfg.grid.half_width, cfg.grid.n_fd)?;
    let mut section = locate_crossings(p, params, &g, sw)?;
    for c in &mut section.crossings {
        // A failed analysis (e.g. an ambiguous kernel) is recorded, not fatal.
        match analyze_potential(cfg, &Potential::scaled(p.clone(), c.s)) {
            Ok(out) => c.analysis = Some(out.analysis),
            Err(e) => c.analysis_error = Some(e.to_string()),
        }
    }
    Ok(section)
}
